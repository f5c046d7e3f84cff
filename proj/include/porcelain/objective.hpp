#pragma once

#include <array>

#include <torch/torch.h>

#include "porcelain/bundles.hpp"
#include "porcelain/taxonomy.hpp"

namespace porcelain {

// Per-task batch-mean cross-entropies and their unweighted sum, as plain numbers.
struct LossBreakdown {
  std::array<double, kNumTasks> per_task{};
  double total = 0.0;

  double operator[](TaskId t) const { return per_task[task_index(t)]; }
  bool operator==(const LossBreakdown&) const = default;
};

// Differentiable counterpart of LossBreakdown.
struct TaskLosses {
  std::array<torch::Tensor, kNumTasks> per_task;
  torch::Tensor total;

  LossBreakdown breakdown() const;
};

// Mean over the batch of -log softmax(logits)[target], computed as
// logsumexp(logits) - logits[target] with max subtraction, so any finite
// logits give a finite loss. logits: B x K, targets: B int64.
// Throws EmptyBatch, ShapeMismatch, TargetOutOfRange.
torch::Tensor cross_entropy(const torch::Tensor& logits, const torch::Tensor& targets);

// d(cross_entropy)/d(logits) in closed form: (softmax(logits) - onehot(targets)) / B.
torch::Tensor cross_entropy_grad(const torch::Tensor& logits, const torch::Tensor& targets);

// L_total = L_dynasty + L_ware + L_glaze + L_type, equal weights.
// Throws ShapeMismatch when batch sizes disagree.
TaskLosses total_loss(const LogitsBundle& logits, const TargetBundle& targets);

}  // namespace porcelain
