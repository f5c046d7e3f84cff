#include <doctest.h>

#include "porcelain/manifest.hpp"
#include "porcelain/synthetic.hpp"
#include "porcelain/text_util.hpp"
#include "porcelain/train.hpp"
#include "support.hpp"

using namespace porcelain;
using porcelain::testing::error_code_of;
using porcelain::testing::TempDir;

namespace {

struct Fixture {
  TempDir dir{"train"};
  std::vector<SampleRecord> records;
  SplitAssignment split;
  TrainConfig config;

  Fixture() {
    SyntheticOptions opts;
    opts.image_side = 64;
    records = load_manifest(generate_synthetic_dataset(30, 5, dir / "data", opts), build_taxonomy());
    split = split_dataset(records, 1);
    config.epochs = 1;
    config.batch_size = 8;
    config.model.arch = Arch::MobileNetV2;
    config.model.pretrained = false;
    config.model.freeze_backbone = false;
    config.model.input_side = 64;
  }
};

std::vector<torch::Tensor> snapshot(torch::nn::Module& m) {
  std::vector<torch::Tensor> out;
  for (const auto& p : m.parameters()) out.push_back(p.detach().clone());
  return out;
}

bool all_equal(const std::vector<torch::Tensor>& a, const std::vector<torch::Tensor>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!torch::equal(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  Fixture f;
  f.config.learning_rate = 0.0;
  torch::manual_seed(0);
  auto model = build_model(f.config.model, build_taxonomy());
  auto before = snapshot(*model);
  auto opt = make_optimizer(*model, f.config);
  PreprocessSpec pre;
  pre.target_side = 64;
  pre.augmentation = AugmentSpec{};
  ImageDataset train(select_split(f.records, f.split, SplitName::Train), build_taxonomy(), pre, 1);
  auto loss = train_epoch(*model, opt, train, f.config, 1);
  CHECK(std::isfinite(loss.total));
  CHECK(loss.total == doctest::Approx(loss.per_task[0] + loss.per_task[1] + loss.per_task[2] + loss.per_task[3]));
  CHECK(all_equal(before, snapshot(*model)));
}

TEST_CASE("one-epoch fit writes the run layout and picks epoch 1") {
  Fixture f;
  auto run = f.dir / "run";
  std::vector<int> seen;
  auto art = fit(f.config, f.split, f.records, build_taxonomy(), run, [&](const EpochLog& l) { seen.push_back(l.epoch); });
  CHECK(art.best_epoch == 1);
  CHECK(art.logs.size() == 1);
  CHECK((seen == std::vector<int>{1}));
  for (const char* name : {"best.ckpt", "spec.txt", "config.txt", "split.txt", "epochs.log", "summary.txt"}) {
    CHECK(std::filesystem::exists(run / name));
  }
  auto journal = epoch_logs_from_text(text::read_file(run / "epochs.log"));
  REQUIRE(journal.size() == 1);
  CHECK(journal[0].train.total == art.logs[0].train.total);
  CHECK(load_split(run / "split.txt").train == f.split.train);

  // The checkpoint reproduces the logged validation loss.
  auto loaded = load_checkpoint(run, build_taxonomy());
  ImageDataset val(select_split(f.records, f.split, SplitName::Val), build_taxonomy(), loaded.descriptor.preprocess, 0);
  auto ev = evaluate_model(*loaded.model, val, build_taxonomy(), 8);
  CHECK(ev.loss.total == doctest::Approx(art.best_val_loss).epsilon(1e-5));
}

TEST_CASE("best checkpoint is the minimum-validation-loss epoch") {
  Fixture f;
  f.config.epochs = 4;
  f.config.learning_rate = 0.01;
  auto art = fit(f.config, f.split, f.records, build_taxonomy(), f.dir / "run");
  REQUIRE(art.logs.size() == 4);
  double best = art.logs[0].val.total;
  int best_epoch = 1;
  for (const auto& l : art.logs) {
    if (l.val.total < best) {
      best = l.val.total;
      best_epoch = l.epoch;
    }
  }
  CHECK(art.best_epoch == best_epoch);
  CHECK(art.best_val_loss == best);

  // Deterministic re-run yields the same trajectory.
  auto again = fit(f.config, f.split, f.records, build_taxonomy(), f.dir / "run2");
  CHECK(again.best_epoch == art.best_epoch);
  CHECK(again.logs[3].train.total == art.logs[3].train.total);
}

TEST_CASE("evaluate_run writes metrics and confusion matrices") {
  Fixture f;
  auto run = f.dir / "run";
  fit(f.config, f.split, f.records, build_taxonomy(), run);
  std::vector<SplitName> splits{SplitName::Val, SplitName::Test};
  auto recs = evaluate_run(run, f.records, build_taxonomy(), splits, 8);
  CHECK(recs.size() == 8);
  CHECK(records_from_text(text::read_file(run / "metrics.tsv")) == recs);
  auto m = confusion_matrix_from_text(text::read_file(run / "confusion_test_glaze.tsv"));
  CHECK(m.size() == 8);
  CHECK(m.total() == static_cast<std::int64_t>(f.split.test.size()));
}

TEST_CASE("checkpoint rejects a different taxonomy") {
  Fixture f;
  auto run = f.dir / "run";
  fit(f.config, f.split, f.records, build_taxonomy(), run);
  const auto& tx = build_taxonomy();
  auto tasks = std::array<TaskSpec, kNumTasks>{tx.tasks()[0], tx.tasks()[1], tx.tasks()[2], tx.tasks()[3]};
  tasks[0].categories = {"Yuan", "Song"};
  TaskTaxonomy other(tasks);
  CHECK((error_code_of([&] { load_checkpoint(run, other); }) == ErrorCode::CheckpointMismatch));
}

TEST_CASE("ablation configurations differ only in initialisation and freezing") {
  TrainConfig base;
  auto [pre, scratch] = ablation_configs(base);
  CHECK(pre.model.pretrained);
  CHECK(pre.model.freeze_backbone);
  CHECK_FALSE(scratch.model.pretrained);
  CHECK_FALSE(scratch.model.freeze_backbone);
  CHECK((config_diff(pre, scratch) == std::vector<std::string>{"freeze_backbone", "pretrained"}));
  CHECK(run_id(pre, 42) != run_id(scratch, 42));
  CHECK(run_id(pre, 42) == run_id(pre, 42));
  CHECK(run_id(pre, 42) != run_id(pre, 43));
  CHECK(run_id(scratch, 42).rfind("mobilenetv2-scratch-", 0) == 0);
}

TEST_CASE("curve and journal formats round trip") {
  EpochLog a;
  a.epoch = 1;
  a.train.per_task = {0.1, 0.2, 1.0 / 3.0, 2.5};
  a.train.total = 0.1 + 0.2 + 1.0 / 3.0 + 2.5;
  a.val.per_task = {1e-300, 5.0, 6.0, 7.0};
  a.val.total = 18.0;
  a.val_accuracy = {0.5, 0.25, 1.0, 0.0};
  a.wall_seconds = 1.25;
  auto b = a;
  b.epoch = 2;
  std::vector<CurveSeries> series{{"pretrained", {a, b}}, {"scratch", {b}}};
  auto back = curves_from_text(curves_to_text(series));
  REQUIRE(back.size() == 2);
  CHECK(back[0].label == "pretrained");
  CHECK(back[1].label == "scratch");
  CHECK(back[0].logs.size() == 2);
  CHECK(back[0].logs[1].epoch == 2);
  CHECK(back[0].logs[0].train.per_task == a.train.per_task);
  CHECK(back[0].logs[0].val.total == a.val.total);

  auto journal = epoch_log_header() + "\n" + epoch_log_row(a) + "\n" + epoch_log_row(b) + "\n";
  auto logs = epoch_logs_from_text(journal);
  REQUIRE(logs.size() == 2);
  CHECK(logs[0] == a);
  CHECK((error_code_of([] { epoch_logs_from_text("epoch\n1\tx\n"); }) == ErrorCode::ParseError));
  CHECK((error_code_of([] { export_curves({}, "/tmp/unused.tsv"); }) == ErrorCode::EmptyReportSet));
}
