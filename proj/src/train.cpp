#include "porcelain/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

namespace {

std::string bool_text(bool b) { return b ? "true" : "false"; }

void append_line(const std::filesystem::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to " + path.string());
  out << line << '\n';
  out.flush();
}

PreprocessSpec eval_preprocess(const TrainConfig& config) {
  PreprocessSpec p = config.preprocess;
  p.target_side = config.model.input_side;
  p.augmentation.reset();
  return p;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidSpec, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidSpec, "batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidSpec, "learning_rate must be finite and non-negative");
  }
  model.validate();
  augmentation.validate();
  auto p = eval_preprocess(*this);
  p.validate();
}

std::map<std::string, std::string> TrainConfig::fields() const {
  std::map<std::string, std::string> f;
  f["epochs"] = std::to_string(epochs);
  f["batch_size"] = std::to_string(batch_size);
  f["learning_rate"] = text::format_real(learning_rate);
  f["beta1"] = text::format_real(beta1);
  f["beta2"] = text::format_real(beta2);
  f["adam_eps"] = text::format_real(adam_eps);
  f["seed"] = std::to_string(seed);
  f["arch"] = std::string(arch_name(model.arch));
  f["pretrained"] = bool_text(model.pretrained);
  f["freeze_backbone"] = bool_text(model.freeze_backbone);
  f["input_side"] = std::to_string(model.input_side);
  for (std::size_t c = 0; c < 3; ++c) {
    f["mean_" + std::to_string(c)] = text::format_real(preprocess.channel_means[c]);
    f["std_" + std::to_string(c)] = text::format_real(preprocess.channel_stds[c]);
  }
  f["augment"] = bool_text(augment);
  f["flip_prob"] = text::format_real(augmentation.horizontal_flip_prob);
  f["rotation_max"] = text::format_real(augmentation.rotation_max_degrees);
  return f;
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : fields()) out += k + "=" + v + "\n";
  return out;
}

std::vector<std::string> config_diff(const TrainConfig& a, const TrainConfig& b) {
  auto fa = a.fields();
  auto fb = b.fields();
  std::vector<std::string> out;
  for (const auto& [k, v] : fa) {
    auto it = fb.find(k);
    if (it == fb.end() || it->second != v) out.push_back(k);
  }
  for (const auto& [k, v] : fb) {
    if (!fa.contains(k)) out.push_back(k);
  }
  return out;
}

std::string run_id(const TrainConfig& config, std::uint64_t split_seed) {
  auto key = config.to_text() + "split_seed=" + std::to_string(split_seed) + "\n";
  return std::string(arch_name(config.model.arch)) + "-" + (config.model.pretrained ? "pretrained" : "scratch") +
         "-" + text::hex64(text::fnv1a64(key)).substr(0, 12);
}

torch::optim::Adam make_optimizer(MultiTaskNetImpl& model, const TrainConfig& config) {
  auto params = model.trainable_parameters();
  if (params.empty()) throw Error(ErrorCode::InvalidSpec, "model has no trainable parameters");
  return torch::optim::Adam(params, torch::optim::AdamOptions(config.learning_rate)
                                        .betas({config.beta1, config.beta2})
                                        .eps(config.adam_eps));
}

LossBreakdown train_epoch(MultiTaskNetImpl& model, torch::optim::Optimizer& optimizer, const ImageDataset& train,
                          const TrainConfig& config, int epoch) {
  model.train();
  LossBreakdown sum;
  std::size_t seen = 0;
  std::size_t batch_id = 0;
  for (const auto& idx : train.batches(config.batch_size, /*shuffle=*/true, static_cast<std::uint64_t>(epoch))) {
    auto batch = train.load(idx, static_cast<std::uint64_t>(epoch));
    optimizer.zero_grad();
    auto logits = model.forward(batch.images);
    auto losses = total_loss(logits, batch.targets);
    auto b = losses.breakdown();
    if (!std::isfinite(b.total)) {
      throw Error(ErrorCode::NonFiniteLoss,
                  "epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_id) + " loss is not finite");
    }
    losses.total.backward();
    optimizer.step();
    const auto w = static_cast<double>(idx.size());
    for (std::size_t t = 0; t < kNumTasks; ++t) sum.per_task[t] += b.per_task[t] * w;
    seen += idx.size();
    ++batch_id;
  }
  for (auto& v : sum.per_task) v /= static_cast<double>(seen);
  sum.total = sum.per_task[0] + sum.per_task[1] + sum.per_task[2] + sum.per_task[3];
  return sum;
}

TrainedArtifact fit(const TrainConfig& config, const SplitAssignment& split, std::span<const SampleRecord> records,
                    const TaskTaxonomy& taxonomy, const std::filesystem::path& run_dir, const EpochCallback& on_epoch) {
  config.validate();
  if (split.train.empty()) throw Error(ErrorCode::EmptySplit, "train split is empty");
  if (split.val.empty()) throw Error(ErrorCode::EmptySplit, "validation split is empty");

  PreprocessSpec train_pre = eval_preprocess(config);
  if (config.augment) train_pre.augmentation = config.augmentation;
  ImageDataset train(select_split(records, split, SplitName::Train), taxonomy, train_pre, config.seed);
  ImageDataset val(select_split(records, split, SplitName::Val), taxonomy, eval_preprocess(config), config.seed);

  std::error_code ec;
  std::filesystem::create_directories(run_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + run_dir.string() + ": " + ec.message());

  RunDescriptor desc;
  desc.label = std::string(arch_display_name(config.model.arch));
  desc.spec = config.model;
  desc.preprocess = eval_preprocess(config);
  desc.taxonomy_fingerprint = taxonomy.fingerprint();
  desc.config_hash = text::hex64(text::fnv1a64(config.to_text()));
  desc.seed = config.seed;
  desc.split_seed = split.seed;
  text::write_file(run_dir / "spec.txt", descriptor_to_text(desc));
  text::write_file(run_dir / "config.txt", config.to_text());
  save_split(split, run_dir / "split.txt");
  const auto journal = run_dir / "epochs.log";
  text::write_file(journal, epoch_log_header() + "\n");

  torch::manual_seed(config.seed);
  auto model = build_model(config.model, taxonomy);
  auto optimizer = make_optimizer(*model, config);

  TrainedArtifact art;
  art.run_dir = run_dir;
  art.checkpoint = run_dir / "best.ckpt";
  art.config = config;
  art.best_val_loss = std::numeric_limits<double>::infinity();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochLog log;
    log.epoch = epoch;
    log.train = train_epoch(*model, optimizer, train, config, epoch);
    auto val_eval = evaluate_model(*model, val, taxonomy, config.batch_size);
    log.val = val_eval.loss;
    for (std::size_t t = 0; t < kNumTasks; ++t) log.val_accuracy[t] = val_eval.reports[t].metrics.accuracy;
    if (!std::isfinite(log.val.total)) {
      throw Error(ErrorCode::NonFiniteLoss, "validation loss is not finite at epoch " + std::to_string(epoch));
    }
    if (log.val.total < art.best_val_loss) {
      art.best_val_loss = log.val.total;
      art.best_epoch = epoch;
      save_weights(*model, art.checkpoint);
    }
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    append_line(journal, epoch_log_row(log));
    art.logs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  text::write_file(run_dir / "summary.txt", "best_epoch=" + std::to_string(art.best_epoch) +
                                                "\nbest_val_loss=" + text::format_real(art.best_val_loss) + "\n");
  return art;
}

std::string epoch_log_header() {
  std::vector<std::string> cols{"epoch", "train_total"};
  for (auto t : kAllTasks) cols.push_back("train_" + std::string(task_name(t)));
  cols.push_back("val_total");
  for (auto t : kAllTasks) cols.push_back("val_" + std::string(task_name(t)));
  for (auto t : kAllTasks) cols.push_back("val_acc_" + std::string(task_name(t)));
  cols.push_back("wall_seconds");
  return text::join(cols, "\t");
}

std::string epoch_log_row(const EpochLog& log) {
  std::vector<std::string> cols{std::to_string(log.epoch), text::format_real(log.train.total)};
  for (auto v : log.train.per_task) cols.push_back(text::format_real(v));
  cols.push_back(text::format_real(log.val.total));
  for (auto v : log.val.per_task) cols.push_back(text::format_real(v));
  for (auto v : log.val_accuracy) cols.push_back(text::format_real(v));
  cols.push_back(text::format_real(log.wall_seconds));
  return text::join(cols, "\t");
}

std::vector<EpochLog> epoch_logs_from_text(std::string_view contents) {
  std::vector<EpochLog> out;
  const auto header = epoch_log_header();
  bool first = true;
  for (const auto& raw : text::split(contents, '\n')) {
    if (text::trim(raw).empty()) continue;
    if (first) {
      if (std::string(text::trim(raw)) != header) throw Error(ErrorCode::ParseError, "unexpected epoch log header");
      first = false;
      continue;
    }
    auto f = text::split(text::trim(raw), '\t');
    if (f.size() != 16) throw Error(ErrorCode::ParseError, "epoch log row has " + std::to_string(f.size()) + " fields");
    EpochLog log;
    std::size_t i = 0;
    log.epoch = static_cast<int>(text::parse_int(f[i++]));
    log.train.total = text::parse_real(f[i++]);
    for (auto& v : log.train.per_task) v = text::parse_real(f[i++]);
    log.val.total = text::parse_real(f[i++]);
    for (auto& v : log.val.per_task) v = text::parse_real(f[i++]);
    for (auto& v : log.val_accuracy) v = text::parse_real(f[i++]);
    log.wall_seconds = text::parse_real(f[i++]);
    out.push_back(log);
  }
  return out;
}

namespace {

std::string curve_header() {
  std::vector<std::string> cols{"run", "epoch", "train_total", "val_total"};
  for (auto t : kAllTasks) cols.push_back("train_" + std::string(task_name(t)));
  for (auto t : kAllTasks) cols.push_back("val_" + std::string(task_name(t)));
  return text::join(cols, "\t");
}

}  // namespace

std::string curves_to_text(std::span<const CurveSeries> series) {
  std::string out = curve_header() + "\n";
  for (const auto& s : series) {
    for (const auto& log : s.logs) {
      std::vector<std::string> cols{s.label, std::to_string(log.epoch), text::format_real(log.train.total),
                                    text::format_real(log.val.total)};
      for (auto v : log.train.per_task) cols.push_back(text::format_real(v));
      for (auto v : log.val.per_task) cols.push_back(text::format_real(v));
      out += text::join(cols, "\t") + "\n";
    }
  }
  return out;
}

std::vector<CurveSeries> curves_from_text(std::string_view contents) {
  std::vector<CurveSeries> out;
  bool first = true;
  for (const auto& raw : text::split(contents, '\n')) {
    if (text::trim(raw).empty()) continue;
    if (first) {
      if (std::string(text::trim(raw)) != curve_header()) throw Error(ErrorCode::ParseError, "unexpected curve header");
      first = false;
      continue;
    }
    auto f = text::split(text::trim(raw), '\t');
    if (f.size() != 12) throw Error(ErrorCode::ParseError, "curve row has " + std::to_string(f.size()) + " fields");
    if (out.empty() || out.back().label != f[0]) out.push_back(CurveSeries{f[0], {}});
    EpochLog log;
    log.epoch = static_cast<int>(text::parse_int(f[1]));
    log.train.total = text::parse_real(f[2]);
    log.val.total = text::parse_real(f[3]);
    for (std::size_t t = 0; t < kNumTasks; ++t) log.train.per_task[t] = text::parse_real(f[4 + t]);
    for (std::size_t t = 0; t < kNumTasks; ++t) log.val.per_task[t] = text::parse_real(f[8 + t]);
    out.back().logs.push_back(log);
  }
  return out;
}

void export_curves(std::span<const CurveSeries> series, const std::filesystem::path& path) {
  if (series.empty()) throw Error(ErrorCode::EmptyReportSet, "no loss curves to export");
  text::write_file(path, curves_to_text(series));
}

std::vector<ReportRecord> evaluate_run(const std::filesystem::path& run_dir, std::span<const SampleRecord> records,
                                       const TaskTaxonomy& taxonomy, std::span<const SplitName> splits,
                                       std::size_t batch_size) {
  auto ckpt = load_checkpoint(run_dir, taxonomy);
  auto split = load_split(run_dir / "split.txt");
  std::vector<ReportRecord> out;
  for (auto s : splits) {
    auto subset = select_split(records, split, s);
    if (subset.empty()) throw Error(ErrorCode::EmptySplit, std::string(split_name(s)) + " split is empty");
    ImageDataset data(std::move(subset), taxonomy, ckpt.descriptor.preprocess, ckpt.descriptor.seed);
    auto result = evaluate_model(*ckpt.model, data, taxonomy, batch_size);
    for (const auto& rep : result.reports) {
      const auto& spec = taxonomy.task(rep.task);
      text::write_file(run_dir / ("confusion_" + std::string(split_name(s)) + "_" + spec.name + ".tsv"),
                       confusion_matrix_to_text(rep.matrix, spec.categories));
      out.push_back(make_record(ckpt.descriptor.label, ckpt.descriptor.spec.pretrained, s, rep));
    }
  }
  text::write_file(run_dir / "metrics.tsv", records_to_text(out));
  return out;
}

std::pair<TrainConfig, TrainConfig> ablation_configs(const TrainConfig& base) {
  TrainConfig pretrained = base;
  pretrained.model.pretrained = true;
  pretrained.model.freeze_backbone = true;
  TrainConfig scratch = base;
  scratch.model.pretrained = false;
  scratch.model.freeze_backbone = false;
  return {pretrained, scratch};
}

AblationResult run_ablation(const TrainConfig& base, const SplitAssignment& split,
                            std::span<const SampleRecord> records, const TaskTaxonomy& taxonomy,
                            const std::filesystem::path& out_dir, const EpochCallback& on_epoch) {
  auto [pre_cfg, scratch_cfg] = ablation_configs(base);
  AblationResult res;
  res.arch = base.model.arch;
  const SplitName eval_splits[] = {SplitName::Val, SplitName::Test};

  res.pretrained = fit(pre_cfg, split, records, taxonomy, out_dir / run_id(pre_cfg, split.seed), on_epoch);
  auto pre_records = evaluate_run(res.pretrained.run_dir, records, taxonomy, eval_splits, base.batch_size);
  res.scratch = fit(scratch_cfg, split, records, taxonomy, out_dir / run_id(scratch_cfg, split.seed), on_epoch);
  auto scratch_records = evaluate_run(res.scratch.run_dir, records, taxonomy, eval_splits, base.batch_size);

  res.records = pre_records;
  res.records.insert(res.records.end(), scratch_records.begin(), scratch_records.end());
  res.curves = {CurveSeries{"pretrained", res.pretrained.logs}, CurveSeries{"scratch", res.scratch.logs}};
  return res;
}

}  // namespace porcelain
