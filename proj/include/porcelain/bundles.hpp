#pragma once

#include <array>

#include <torch/torch.h>

#include "porcelain/taxonomy.hpp"

namespace porcelain {

// Four unnormalised score matrices sharing one batch dimension; widths follow
// the taxonomy cardinalities.
struct LogitsBundle {
  std::array<torch::Tensor, kNumTasks> logits;

  const torch::Tensor& operator[](TaskId t) const { return logits[task_index(t)]; }
  std::int64_t batch_size() const { return logits[0].size(0); }
};

// Four int64 index vectors of equal length.
struct TargetBundle {
  std::array<torch::Tensor, kNumTasks> targets;

  const torch::Tensor& operator[](TaskId t) const { return targets[task_index(t)]; }
  std::int64_t batch_size() const { return targets[0].size(0); }
};

}  // namespace porcelain
