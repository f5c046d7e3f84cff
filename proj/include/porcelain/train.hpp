#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "porcelain/checkpoint.hpp"
#include "porcelain/dataset.hpp"
#include "porcelain/evaluation.hpp"
#include "porcelain/model.hpp"
#include "porcelain/objective.hpp"
#include "porcelain/report.hpp"
#include "porcelain/split.hpp"

namespace porcelain {

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  // Adam moment decay rates and epsilon at their conventional defaults.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 42;
  ModelSpec model;
  PreprocessSpec preprocess;  // target_side follows model.input_side
  AugmentSpec augmentation;
  bool augment = true;

  void validate() const;  // throws InvalidSpec
  // Flat key=value rendering; the basis of config hashes and diffs.
  std::map<std::string, std::string> fields() const;
  std::string to_text() const;
};

// Keys whose values differ between two configs.
std::vector<std::string> config_diff(const TrainConfig& a, const TrainConfig& b);

// Directory name for a run: hash of the config, the split seed and the architecture.
std::string run_id(const TrainConfig& config, std::uint64_t split_seed);

struct EpochLog {
  int epoch = 0;
  LossBreakdown train;
  LossBreakdown val;
  std::array<double, kNumTasks> val_accuracy{};
  double wall_seconds = 0.0;

  bool operator==(const EpochLog&) const = default;
};

struct TrainedArtifact {
  std::filesystem::path run_dir;
  std::filesystem::path checkpoint;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<EpochLog> logs;
  TrainConfig config;
};

// One pass over shuffled mini-batches (last batch may be short): forward,
// summed task loss, Adam step on trainable parameters. Returns the
// sample-weighted epoch mean. Throws NonFiniteLoss naming the batch.
LossBreakdown train_epoch(MultiTaskNetImpl& model, torch::optim::Optimizer& optimizer, const ImageDataset& train,
                          const TrainConfig& config, int epoch);

torch::optim::Adam make_optimizer(MultiTaskNetImpl& model, const TrainConfig& config);

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains for config.epochs, evaluating validation loss after every epoch and
// writing <run_dir>/best.ckpt whenever it strictly improves. Also writes
// spec.txt, split.txt and the epochs.log journal (appended per epoch).
// Throws EmptySplit and propagates train_epoch errors.
TrainedArtifact fit(const TrainConfig& config, const SplitAssignment& split, std::span<const SampleRecord> records,
                    const TaskTaxonomy& taxonomy, const std::filesystem::path& run_dir,
                    const EpochCallback& on_epoch = {});

// Journal format: tab-separated header then one row per epoch.
std::string epoch_log_header();
std::string epoch_log_row(const EpochLog& log);
std::vector<EpochLog> epoch_logs_from_text(std::string_view text);  // throws ParseError

struct CurveSeries {
  std::string label;
  std::vector<EpochLog> logs;
};

// One row per (run label, epoch): train and validation totals followed by
// per-task train and validation losses in task order.
std::string curves_to_text(std::span<const CurveSeries> series);
std::vector<CurveSeries> curves_from_text(std::string_view text);  // throws ParseError
void export_curves(std::span<const CurveSeries> series, const std::filesystem::path& path);

// Re-evaluates a finished run's best checkpoint and produces report records
// for the requested splits; confusion matrices go to
// <run_dir>/confusion_<split>_<task>.tsv and records to <run_dir>/metrics.tsv.
std::vector<ReportRecord> evaluate_run(const std::filesystem::path& run_dir, std::span<const SampleRecord> records,
                                       const TaskTaxonomy& taxonomy, std::span<const SplitName> splits,
                                       std::size_t batch_size = 32);

// The two configurations compared by the transfer-learning ablation.
std::pair<TrainConfig, TrainConfig> ablation_configs(const TrainConfig& base);

struct AblationResult {
  Arch arch = Arch::MobileNetV2;
  TrainedArtifact pretrained;
  TrainedArtifact scratch;
  std::vector<ReportRecord> records;  // validation and test records for both runs
  std::vector<CurveSeries> curves;    // labelled "pretrained" and "scratch"
};

// Two fits on the same split and seed, one pretrained with a frozen backbone
// and one trained from scratch end to end, each evaluated at its best
// checkpoint. Run directories are created under out_dir.
AblationResult run_ablation(const TrainConfig& base, const SplitAssignment& split,
                            std::span<const SampleRecord> records, const TaskTaxonomy& taxonomy,
                            const std::filesystem::path& out_dir, const EpochCallback& on_epoch = {});

}  // namespace porcelain
