#include <doctest.h>

#include <random>

#include "porcelain/metrics.hpp"
#include "porcelain/report.hpp"
#include "support.hpp"

using namespace porcelain;
using porcelain::testing::error_code_of;

namespace {

ConfusionMatrix from_rows(std::vector<std::vector<std::int64_t>> rows) {
  ConfusionMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) m.add(i, j, rows[i][j]);
  return m;
}

}  // namespace

TEST_CASE("confusion matrix construction") {
  std::vector<std::int64_t> p{0, 1, 2}, t{0, 1, 2};
  auto id = confusion_matrix(p, t, 3);
  CHECK(id.trace() == 3);
  CHECK(id.total() == 3);
  std::vector<std::int64_t> p2{1, 1}, t2{0, 1};
  CHECK((confusion_matrix(p2, t2, 2) == from_rows({{0, 1}, {0, 1}})));

  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> d(0, 4);
  std::vector<std::int64_t> rp, rt;
  for (int i = 0; i < 200; ++i) {
    rp.push_back(d(rng));
    rt.push_back(d(rng));
  }
  CHECK(confusion_matrix(rp, rt, 5).total() == 200);

  std::vector<std::int64_t> bad{0, 5};
  CHECK((error_code_of([&] { confusion_matrix(bad, t2, 2); }) == ErrorCode::IndexOutOfRange));
  CHECK((error_code_of([&] { confusion_matrix(p, t2, 3); }) == ErrorCode::ShapeMismatch));
  CHECK((error_code_of([] { confusion_matrix({}, {}, 3); }) == ErrorCode::ShapeMismatch));

  auto a = from_rows({{1, 0}, {2, 3}});
  a += from_rows({{0, 1}, {0, 1}});
  CHECK((a == from_rows({{1, 1}, {2, 4}})));
}

TEST_CASE("worked two-class matrix") {
  auto m = metrics_from_matrix(from_rows({{3, 1}, {1, 5}}));
  CHECK(m.n == 10);
  CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.balanced_accuracy == doctest::Approx(0.7916666666666667).epsilon(1e-12));
  CHECK(m.precision == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(m.per_category[1].tp == 5);
  CHECK(m.per_category[1].fp == 1);
  CHECK(m.per_category[1].fn == 1);
  CHECK(m.per_category[1].tn == 3);
}

TEST_CASE("metric edge cases") {
  auto perfect = metrics_from_matrix(from_rows({{4, 0, 0}, {0, 2, 0}, {0, 0, 7}}));
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.balanced_accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
  CHECK((metrics_from_matrix(from_rows({{2, 0}, {1, 1}})).balanced_accuracy == doctest::Approx(0.75)));
  // Absent categories do not dilute balanced accuracy; unpredicted ones score precision 0.
  auto absent = metrics_from_matrix(from_rows({{2, 0, 0}, {0, 0, 0}, {1, 0, 1}}));
  CHECK(absent.balanced_accuracy == doctest::Approx(0.75));
  CHECK(absent.per_category[1].precision == 0.0);
  CHECK((error_code_of([] { metrics_from_matrix(ConfusionMatrix(3)); }) == ErrorCode::EmptyMatrix));
}

TEST_CASE("argmax tie-break") {
  auto logits = torch::tensor({0.0f, 0.0f, 0.0f, 1.0f, 3.0f, 3.0f}).reshape({2, 3});
  CHECK((argmax_predictions(logits) == std::vector<std::int64_t>{0, 1}));
}

TEST_CASE("confusion matrix text round trip") {
  auto m = from_rows({{3, 1, 0}, {0, 7, 2}, {12, 0, 1}});
  std::vector<std::string> names{"Song", "Yuan", "Other"};
  std::vector<std::string> back_names;
  auto back = confusion_matrix_from_text(confusion_matrix_to_text(m, names), &back_names);
  CHECK(back == m);
  CHECK(back_names == names);
  CHECK((error_code_of([] { confusion_matrix_from_text("garbage"); }) == ErrorCode::ParseError));
}

TEST_CASE("report formatting") {
  CHECK(format_percent(0.976) == "97.6");
  CHECK(format_ratio(0.976) == "0.976");
  CHECK(format_percent(0.8610) == "86.1");
  CHECK(format_percent(0.733) == "73.3");

  ReportRecord r{"InceptionV3", true, SplitName::Test, TaskId::Dynasty, 600, 0.976, 0.953, 0.976, 0.976, 0.976};
  std::vector<ReportRecord> one{r};
  auto t = render_tables(one);
  CHECK(t.comparison.find("| InceptionV3 | Dynasty | - | 97.6 | 95.3 | 0.976 | 0.976 | 0.976 |") !=
        std::string::npos);
  CHECK(std::count(t.transfer.begin(), t.transfer.end(), '\n') == 3);  // header, rule, one row

  std::vector<ReportRecord> pair{
      {"MobileNetV2", false, SplitName::Test, TaskId::Type, 600, 0.733, 0.669, 0.74, 0.733, 0.73},
      {"MobileNetV2", true, SplitName::Test, TaskId::Type, 600, 0.861, 0.848, 0.866, 0.861, 0.861}};
  auto p = render_tables(pair);
  auto yes = p.transfer.find("| MobileNetV2 | Type | Yes | 86.1 | 84.8 |");
  auto no = p.transfer.find("| MobileNetV2 | Type | No | 73.3 | 66.9 |");
  CHECK(yes != std::string::npos);
  CHECK(no != std::string::npos);
  CHECK(yes < no);
  CHECK(p.comparison.find("MobileNetV2 (scratch)") != std::string::npos);
  CHECK((error_code_of([] { render_tables({}); }) == ErrorCode::EmptyReportSet));
}

TEST_CASE("metrics records round trip") {
  std::vector<ReportRecord> recs{
      {"ResNet50", true, SplitName::Val, TaskId::Glaze, 24, 0.1 + 0.2, 1.0 / 3.0, 0.5, 2.0 / 7.0, 1e-17},
      {"VGG16", false, SplitName::Test, TaskId::Ware, 5, 0.0, 0.0, 0.0, 0.0, 0.0}};
  CHECK(records_from_text(records_to_text(recs)) == recs);
  CHECK((error_code_of([] { records_from_text("model\tbad\n"); }) == ErrorCode::ParseError));
}
