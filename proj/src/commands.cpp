#include "porcelain/commands.hpp"

#include <algorithm>
#include <future>
#include <iomanip>

#include "porcelain/error.hpp"
#include "porcelain/manifest.hpp"
#include "porcelain/synthetic.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

namespace {

namespace fs = std::filesystem;

void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string() + ": " + ec.message());
  auto probe = dir / ".write-probe";
  text::write_file(probe, "");
  fs::remove(probe, ec);
}

std::vector<SampleRecord> load_records(const ExperimentConfig& cfg) {
  if (cfg.manifest.empty()) throw Error(ErrorCode::InvalidValue, "manifest: a dataset manifest is required");
  return load_manifest(cfg.manifest, build_taxonomy());
}

TrainConfig train_config_for(const ExperimentConfig& cfg, Arch arch) {
  TrainConfig tc = cfg.train;
  tc.model.arch = arch;
  return tc;
}

void apply_determinism(const ExperimentConfig& cfg) {
  if (cfg.deterministic) {
    torch::set_num_threads(1);
    at::globalContext().setDeterministicAlgorithms(true, /*warn_only=*/true);
  }
}

std::string epoch_line(const std::string& tag, const EpochLog& log) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << tag << " epoch " << log.epoch << " train " << log.train.total
     << " val " << log.val.total << " val_acc";
  for (auto a : log.val_accuracy) ss << ' ' << std::setprecision(3) << a;
  ss << " (" << std::setprecision(1) << log.wall_seconds << "s)";
  return ss.str();
}

// Run directories (those holding spec.txt) directly under `dir`, sorted by name.
std::vector<fs::path> run_dirs(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "spec.txt")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void cmd_prepare(const ExperimentConfig& cfg, std::ostream& out) {
  const auto& taxonomy = build_taxonomy();
  auto records = load_records(cfg);
  ensure_output_dir(cfg.output_dir);
  auto split = split_dataset(records, cfg.split_seed);
  save_split(split, cfg.output_dir / "split.txt");
  text::write_file(cfg.output_dir / "histogram.tsv", histogram_to_text(taxonomy, label_histogram(taxonomy, records)));
  text::write_file(cfg.output_dir / "taxonomy.txt", taxonomy.to_text());
  out << "prepared " << records.size() << " samples: train " << split.train.size() << ", val " << split.val.size()
      << ", test " << split.test.size() << " -> " << (cfg.output_dir / "split.txt").string() << "\n";
}

void cmd_synth(const ExperimentConfig& cfg, std::ostream& out) {
  ensure_output_dir(cfg.output_dir);
  SyntheticOptions opts;
  opts.image_side = cfg.synth_side;
  auto manifest = generate_synthetic_dataset(cfg.synth_samples, cfg.synth_seed, cfg.output_dir, opts);
  out << "wrote " << cfg.synth_samples << " synthetic samples -> " << manifest.string() << "\n";
}

void cmd_compare(const ExperimentConfig& cfg, std::ostream& out);

void cmd_train(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.ablation) return cmd_compare(cfg, out);
  const auto& taxonomy = build_taxonomy();
  auto records = load_records(cfg);
  ensure_output_dir(cfg.output_dir);
  auto split = split_dataset(records, cfg.split_seed);
  apply_determinism(cfg);

  auto train_one = [&](Arch arch) {
    auto tc = train_config_for(cfg, arch);
    auto dir = cfg.output_dir / run_id(tc, split.seed);
    const std::string tag(arch_name(arch));
    EpochCallback cb;
    if (!cfg.parallel) cb = [&](const EpochLog& log) { out << epoch_line(tag, log) << "\n" << std::flush; };
    auto art = fit(tc, split, records, taxonomy, dir, cb);
    return "trained " + tag + ": best epoch " + std::to_string(art.best_epoch) + " val loss " +
           text::format_real(art.best_val_loss) + " -> " + art.checkpoint.string() + "\n";
  };

  if (cfg.parallel && cfg.archs.size() > 1) {
    std::vector<std::future<std::string>> jobs;
    for (auto a : cfg.archs) jobs.push_back(std::async(std::launch::async, train_one, a));
    for (auto& j : jobs) out << j.get();
  } else {
    for (auto a : cfg.archs) out << train_one(a);
  }
}

void print_records(const std::vector<ReportRecord>& recs, std::ostream& out) {
  for (const auto& r : recs) {
    out << r.model << (r.transfer ? " pretrained " : " scratch ") << split_name(r.split) << ' '
        << task_name(r.task) << ": acc " << format_percent(r.accuracy) << " bal " << format_percent(r.balanced_accuracy)
        << " P " << format_ratio(r.precision) << " R " << format_ratio(r.recall) << " F1 " << format_ratio(r.f1)
        << "\n";
  }
}

void cmd_evaluate(const ExperimentConfig& cfg, std::ostream& out) {
  const auto& taxonomy = build_taxonomy();
  auto records = load_records(cfg);
  apply_determinism(cfg);
  auto dirs = cfg.checkpoints.empty() ? run_dirs(cfg.output_dir) : cfg.checkpoints;
  if (dirs.empty()) throw Error(ErrorCode::IoError, "no run directories found under " + cfg.output_dir.string());
  for (const auto& dir : dirs) {
    auto recs = evaluate_run(dir, records, taxonomy, cfg.eval_splits, cfg.train.batch_size);
    out << "evaluated " << dir.string() << "\n";
    print_records(recs, out);
  }
}

void cmd_compare(const ExperimentConfig& cfg, std::ostream& out) {
  const auto& taxonomy = build_taxonomy();
  auto records = load_records(cfg);
  ensure_output_dir(cfg.output_dir);
  auto split = split_dataset(records, cfg.split_seed);
  apply_determinism(cfg);
  for (auto arch : cfg.archs) {
    const std::string tag(arch_name(arch));
    auto res = run_ablation(train_config_for(cfg, arch), split, records, taxonomy, cfg.output_dir,
                            [&](const EpochLog& log) { out << epoch_line(tag, log) << "\n" << std::flush; });
    export_curves(res.curves, cfg.output_dir / ("curves_" + tag + ".tsv"));
    auto tables = render_tables(res.records);
    text::write_file(cfg.output_dir / ("transfer_" + tag + ".md"), tables.transfer);
    out << "compared " << tag << ": pretrained " << res.pretrained.run_dir.filename().string() << ", scratch "
        << res.scratch.run_dir.filename().string() << "\n"
        << tables.transfer;
  }
}

void cmd_report(const ExperimentConfig& cfg, std::ostream& out) {
  std::vector<ReportRecord> records;
  std::vector<CurveSeries> curves;
  for (const auto& dir : run_dirs(cfg.output_dir)) {
    if (fs::exists(dir / "metrics.tsv")) {
      for (auto& r : records_from_text(text::read_file(dir / "metrics.tsv"))) {
        if (r.split != SplitName::Train) records.push_back(std::move(r));
      }
    }
    if (fs::exists(dir / "epochs.log")) {
      auto d = descriptor_from_text(text::read_file(dir / "spec.txt"));
      curves.push_back(CurveSeries{std::string(arch_name(d.spec.arch)) + "-" +
                                       (d.spec.pretrained ? "pretrained" : "scratch"),
                                   epoch_logs_from_text(text::read_file(dir / "epochs.log"))});
    }
  }
  auto tables = render_tables(records);
  text::write_file(cfg.output_dir / "table_comparison.md", tables.comparison);
  text::write_file(cfg.output_dir / "table_transfer.md", tables.transfer);
  export_curves(curves, cfg.output_dir / "curves.tsv");
  out << tables.comparison << "\n" << tables.transfer;
}

}  // namespace

void run_command(std::string_view command, const ExperimentConfig& config, std::ostream& out) {
  if (command == "prepare") return cmd_prepare(config, out);
  if (command == "synth") return cmd_synth(config, out);
  if (command == "train") return cmd_train(config, out);
  if (command == "evaluate") return cmd_evaluate(config, out);
  if (command == "compare") return cmd_compare(config, out);
  if (command == "report") return cmd_report(config, out);
  throw Error(ErrorCode::UnknownCommand,
              "'" + std::string(command) + "' (valid: prepare, synth, train, evaluate, compare, report)");
}

int dispatch_command(std::string_view command, const ExperimentConfig& config, std::ostream& out,
                     std::ostream& err) {
  try {
    run_command(command, config, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const c10::Error& e) {
    err << "error: Internal: " << Error(ErrorCode::IoError, e.what_without_backtrace()).detail() << "\n";
  } catch (const std::exception& e) {
    err << "error: Internal: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace porcelain
