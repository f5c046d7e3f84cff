#include "porcelain/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

namespace {

constexpr std::string_view kRecordHeader =
    "model\ttransfer\tsplit\ttask\tn\taccuracy\tbalanced_accuracy\tprecision\trecall\tf1";

bool parse_yes_no(std::string_view s) {
  auto key = text::to_lower(text::trim(s));
  if (key == "yes") return true;
  if (key == "no") return false;
  throw Error(ErrorCode::ParseError, "expected yes/no, got '" + std::string(s) + "'");
}

std::string md_row(const std::vector<std::string>& cells) { return "| " + text::join(cells, " | ") + " |\n"; }

std::string md_rule(std::size_t n) {
  std::string out = "|";
  for (std::size_t i = 0; i < n; ++i) out += "---|";
  return out + "\n";
}

}  // namespace

ReportRecord make_record(std::string model, bool transfer, SplitName split, const MetricsReport& report) {
  const auto& m = report.metrics;
  return ReportRecord{std::move(model), transfer, split, report.task, m.n,
                      m.accuracy, m.balanced_accuracy, m.precision, m.recall, m.f1};
}

std::string records_to_text(std::span<const ReportRecord> records) {
  std::string out(kRecordHeader);
  out += "\n";
  for (const auto& r : records) {
    out += r.model + "\t" + (r.transfer ? "yes" : "no") + "\t" + std::string(split_name(r.split)) + "\t" +
           std::string(task_name(r.task)) + "\t" + std::to_string(r.n) + "\t" + text::format_real(r.accuracy) +
           "\t" + text::format_real(r.balanced_accuracy) + "\t" + text::format_real(r.precision) + "\t" +
           text::format_real(r.recall) + "\t" + text::format_real(r.f1) + "\n";
  }
  return out;
}

std::vector<ReportRecord> records_from_text(std::string_view contents) {
  std::vector<ReportRecord> out;
  bool header = true;
  std::size_t ln = 0;
  for (const auto& raw : text::split(contents, '\n')) {
    ++ln;
    if (text::trim(raw).empty()) continue;
    std::string line = raw;
    if (line.back() == '\r') line.pop_back();
    if (header) {
      if (line != kRecordHeader) throw Error(ErrorCode::ParseError, "unexpected metrics header");
      header = false;
      continue;
    }
    auto f = text::split(line, '\t');
    if (f.size() != 10) throw Error(ErrorCode::ParseError, "metrics line " + std::to_string(ln) + " has wrong width");
    ReportRecord r;
    r.model = f[0];
    r.transfer = parse_yes_no(f[1]);
    try {
      r.split = parse_split_name(f[2]);
      r.task = parse_task(f[3]);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "metrics line " + std::to_string(ln) + ": " + e.detail());
    }
    r.n = text::parse_int(f[4]);
    r.accuracy = text::parse_real(f[5]);
    r.balanced_accuracy = text::parse_real(f[6]);
    r.precision = text::parse_real(f[7]);
    r.recall = text::parse_real(f[8]);
    r.f1 = text::parse_real(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

std::string format_ratio(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", fraction);
  return buf;
}

RenderedTables render_tables(std::span<const ReportRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyReportSet, "no metrics records to render");

  // (model, !transfer, task) -> per-split record; !transfer sorts pretrained first.
  using Key = std::tuple<std::string, bool, std::size_t>;
  std::map<Key, std::map<SplitName, const ReportRecord*>> cells;
  for (const auto& r : records) cells[{r.model, !r.transfer, task_index(r.task)}][r.split] = &r;

  std::set<std::string> models_with_both;
  {
    std::map<std::string, std::set<bool>> flags;
    for (const auto& r : records) flags[r.model].insert(r.transfer);
    for (const auto& [m, f] : flags) {
      if (f.size() == 2) models_with_both.insert(m);
    }
  }

  RenderedTables out;
  out.comparison = md_row({"Model", "Task", "Validation set accuracy (%)", "Test set accuracy (%)",
                           "Test set balanced accuracy (%)", "Precision", "Recall", "F1 Score"});
  out.comparison += md_rule(8);
  out.transfer = md_row({"Model", "Task", "Transfer Learning", "Test Accuracy (%)", "Balanced Test Accuracy (%)",
                         "Precision", "Recall", "F1 Score"});
  out.transfer += md_rule(8);

  for (const auto& [key, by_split] : cells) {
    const auto& [model, scratch, t] = key;
    const auto task = std::string(task_display_name(kAllTasks[t]));
    auto find = [&](SplitName s) -> const ReportRecord* {
      auto it = by_split.find(s);
      return it == by_split.end() ? nullptr : it->second;
    };
    const ReportRecord* val = find(SplitName::Val);
    const ReportRecord* test = find(SplitName::Test);
    std::string label = model;
    if (scratch && models_with_both.contains(model)) label += " (scratch)";
    const std::string dash = "-";
    out.comparison += md_row({label, task, val ? format_percent(val->accuracy) : dash,
                              test ? format_percent(test->accuracy) : dash,
                              test ? format_percent(test->balanced_accuracy) : dash,
                              test ? format_ratio(test->precision) : dash, test ? format_ratio(test->recall) : dash,
                              test ? format_ratio(test->f1) : dash});
    if (test) {
      out.transfer += md_row({model, task, scratch ? "No" : "Yes", format_percent(test->accuracy),
                              format_percent(test->balanced_accuracy), format_ratio(test->precision),
                              format_ratio(test->recall), format_ratio(test->f1)});
    }
  }
  return out;
}

}  // namespace porcelain
