#include "porcelain/metrics.hpp"

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

ConfusionMatrix::ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::int64_t n) {
  if (truth >= k_ || predicted >= k_) {
    throw Error(ErrorCode::IndexOutOfRange, "category index outside [0, " + std::to_string(k_) + ")");
  }
  counts_[truth * k_ + predicted] += n;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < k_; ++i) n += at(i, i);
  return n;
}

std::int64_t ConfusionMatrix::support(std::size_t category) const {
  std::int64_t n = 0;
  for (std::size_t p = 0; p < k_; ++p) n += at(category, p);
  return n;
}

std::int64_t ConfusionMatrix::predicted(std::size_t category) const {
  std::int64_t n = 0;
  for (std::size_t t = 0; t < k_; ++t) n += at(t, category);
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw Error(ErrorCode::ShapeMismatch, "adding confusion matrices of different size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const std::int64_t> predictions, std::span<const std::int64_t> targets,
                                 std::size_t k) {
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "predictions (" + std::to_string(predictions.size()) + ") and targets (" +
                                              std::to_string(targets.size()) + ") must be equal and non-empty");
  }
  ConfusionMatrix m(k);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] < 0 || targets[i] < 0) throw Error(ErrorCode::IndexOutOfRange, "negative category index");
    m.add(static_cast<std::size_t>(targets[i]), static_cast<std::size_t>(predictions[i]));
  }
  return m;
}

MetricsSummary metrics_from_matrix(const ConfusionMatrix& matrix) {
  const auto total = matrix.total();
  if (total < 1) throw Error(ErrorCode::EmptyMatrix, "confusion matrix holds no samples");
  const auto k = matrix.size();
  MetricsSummary s;
  s.n = total;
  s.per_category.resize(k);

  double recall_sum = 0.0;
  std::size_t present = 0;
  double wp = 0.0, wr = 0.0, wf = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    auto& m = s.per_category[c];
    m.tp = matrix.at(c, c);
    m.support = matrix.support(c);
    m.fn = m.support - m.tp;
    m.fp = matrix.predicted(c) - m.tp;
    m.tn = total - m.tp - m.fp - m.fn;
    m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = m.support > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.support) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (m.support > 0) {
      ++present;
      recall_sum += m.recall;
      const auto w = static_cast<double>(m.support);
      wp += w * m.precision;
      wr += w * m.recall;
      wf += w * m.f1;
    }
  }
  const auto n = static_cast<double>(total);
  s.accuracy = static_cast<double>(matrix.trace()) / n;
  s.balanced_accuracy = recall_sum / static_cast<double>(present);
  s.precision = wp / n;
  s.recall = wr / n;
  s.f1 = wf / n;
  return s;
}

std::vector<std::int64_t> argmax_predictions(const torch::Tensor& logits) {
  auto cpu = logits.detach().to(torch::kCPU, torch::kFloat64).contiguous();
  auto acc = cpu.accessor<double, 2>();
  std::vector<std::int64_t> out(static_cast<std::size_t>(cpu.size(0)));
  for (std::int64_t i = 0; i < cpu.size(0); ++i) {
    std::int64_t best = 0;
    for (std::int64_t j = 1; j < cpu.size(1); ++j) {
      if (acc[i][j] > acc[i][best]) best = j;
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

std::string confusion_matrix_to_text(const ConfusionMatrix& matrix, std::span<const std::string> names) {
  if (names.size() != matrix.size()) throw Error(ErrorCode::ShapeMismatch, "name count differs from matrix size");
  std::string out = "true\\predicted";
  for (const auto& n : names) out += "\t" + n;
  out += "\n";
  for (std::size_t t = 0; t < matrix.size(); ++t) {
    out += names[t];
    for (std::size_t p = 0; p < matrix.size(); ++p) out += "\t" + std::to_string(matrix.at(t, p));
    out += "\n";
  }
  return out;
}

ConfusionMatrix confusion_matrix_from_text(std::string_view contents, std::vector<std::string>* names) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : text::split(contents, '\n')) {
    if (text::trim(line).empty()) continue;
    std::string l = line;
    if (!l.empty() && l.back() == '\r') l.pop_back();
    rows.push_back(text::split(l, '\t'));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "empty confusion matrix file");
  if (rows[0].size() < 2 || rows[0][0] != "true\\predicted") {
    throw Error(ErrorCode::ParseError, "missing confusion matrix header");
  }
  const auto k = rows[0].size() - 1;
  if (rows.size() != k + 1) throw Error(ErrorCode::ParseError, "confusion matrix is not square");
  ConfusionMatrix m(k);
  if (names) names->assign(rows[0].begin() + 1, rows[0].end());
  for (std::size_t t = 0; t < k; ++t) {
    const auto& row = rows[t + 1];
    if (row.size() != k + 1 || row[0] != rows[0][t + 1]) {
      throw Error(ErrorCode::ParseError, "confusion matrix row " + std::to_string(t + 2));
    }
    for (std::size_t p = 0; p < k; ++p) m.add(t, p, text::parse_int(row[p + 1]));
  }
  return m;
}

}  // namespace porcelain
