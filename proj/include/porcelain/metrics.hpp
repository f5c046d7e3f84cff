#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <torch/torch.h>

#include "porcelain/taxonomy.hpp"

namespace porcelain {

// K x K counts; rows are true categories, columns predicted categories.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k = 0);

  std::size_t size() const { return k_; }
  std::int64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  void add(std::size_t truth, std::size_t predicted, std::int64_t n = 1);

  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t support(std::size_t category) const;    // row sum
  std::int64_t predicted(std::size_t category) const;  // column sum

  // Element-wise sum; the reduction for per-batch partial matrices.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix& other) const = default;

 private:
  std::size_t k_;
  std::vector<std::int64_t> counts_;
};

// Throws ShapeMismatch (length mismatch or empty) and IndexOutOfRange.
ConfusionMatrix confusion_matrix(std::span<const std::int64_t> predictions, std::span<const std::int64_t> targets,
                                 std::size_t k);

struct CategoryMetrics {
  std::int64_t support = 0;
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;  // 0 when nothing was predicted as this category
  double recall = 0.0;     // 0 when support is 0
  double f1 = 0.0;         // 0 when precision and recall are both 0
};

struct MetricsSummary {
  std::int64_t n = 0;
  double accuracy = 0.0;
  // Unweighted mean recall over categories present in the subset.
  double balanced_accuracy = 0.0;
  // Support-weighted means over categories present in the subset.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<CategoryMetrics> per_category;
};

// Throws EmptyMatrix when the matrix holds no samples.
MetricsSummary metrics_from_matrix(const ConfusionMatrix& matrix);

struct MetricsReport {
  TaskId task = TaskId::Dynasty;
  MetricsSummary metrics;
  ConfusionMatrix matrix;
};

// Per-row argmax; ties resolve to the lowest category index.
std::vector<std::int64_t> argmax_predictions(const torch::Tensor& logits);

// Tab-separated, with a header row and a leading column of category names.
std::string confusion_matrix_to_text(const ConfusionMatrix& matrix, std::span<const std::string> names);
// Throws ParseError. Category names are returned through `names` when given.
ConfusionMatrix confusion_matrix_from_text(std::string_view text, std::vector<std::string>* names = nullptr);

}  // namespace porcelain
