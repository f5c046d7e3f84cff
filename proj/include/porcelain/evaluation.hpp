#pragma once

#include <array>
#include <cstddef>

#include "porcelain/dataset.hpp"
#include "porcelain/metrics.hpp"
#include "porcelain/model.hpp"
#include "porcelain/objective.hpp"

namespace porcelain {

struct EvaluationResult {
  std::array<MetricsReport, kNumTasks> reports;
  LossBreakdown loss;  // sample-weighted mean over the subset
};

// Inference-mode pass over every sample; predictions are per-task argmax with
// ties to the lowest index. The dataset must not carry augmentation
// (InvalidSpec otherwise).
EvaluationResult evaluate_model(MultiTaskNetImpl& model, const ImageDataset& data, const TaskTaxonomy& taxonomy,
                                std::size_t batch_size = 32);

}  // namespace porcelain
