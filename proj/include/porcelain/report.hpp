#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "porcelain/metrics.hpp"
#include "porcelain/split.hpp"
#include "porcelain/taxonomy.hpp"

namespace porcelain {

// One evaluated (model, transfer flag, split, task) cell.
struct ReportRecord {
  std::string model;      // display label, e.g. "MobileNetV2"
  bool transfer = false;  // backbone initialised from pretrained weights
  SplitName split = SplitName::Test;
  TaskId task = TaskId::Dynasty;
  std::int64_t n = 0;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const ReportRecord&) const = default;
};

ReportRecord make_record(std::string model, bool transfer, SplitName split, const MetricsReport& report);

// Tab-separated with a header row; reals use shortest round-trip formatting.
std::string records_to_text(std::span<const ReportRecord> records);
std::vector<ReportRecord> records_from_text(std::string_view text);  // throws ParseError

struct RenderedTables {
  // Model x task: validation accuracy, test accuracy, balanced accuracy, P, R, F1.
  std::string comparison;
  // Adds the transfer-learning Yes/No column; test metrics only.
  std::string transfer;
};

// Percentages to one decimal, ratios to three. Rows are ordered by model
// label, pretrained before scratch, then task order. Throws EmptyReportSet.
RenderedTables render_tables(std::span<const ReportRecord> records);

std::string format_percent(double fraction);
std::string format_ratio(double fraction);

}  // namespace porcelain
