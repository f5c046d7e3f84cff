#include "porcelain/config.hpp"

#include <algorithm>

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "manifest",      "output_dir",      "epochs",       "batch_size",   "learning_rate", "seed",
      "split_seed",    "archs",           "arch",         "pretrained",   "freeze_backbone", "ablation",
      "deterministic", "parallel",        "input_side",   "augment",      "flip_prob",     "rotation_max",
      "weights_dir",   "checkpoint",      "eval_splits",  "synth_samples", "synth_seed",   "synth_side",
  };
  return keys;
}

std::map<std::string, std::string> parse_key_values(std::string_view contents) {
  std::map<std::string, std::string> out;
  std::size_t ln = 0;
  for (const auto& raw : text::split(contents, '\n')) {
    ++ln;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(ln) + ": expected key=value");
    }
    auto key = text::to_lower(text::trim(line.substr(0, eq)));
    if (key.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(ln) + ": empty key");
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorCode::UnknownKey, "'" + key + "' (line " + std::to_string(ln) + ")");
    }
    out[key] = std::string(text::trim(line.substr(eq + 1)));
  }
  return out;
}

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(ErrorCode::InvalidValue, key + "='" + value + "': " + why);
}

std::int64_t as_int(const std::string& key, const std::string& v, std::int64_t min) {
  std::int64_t n = 0;
  try {
    n = text::parse_int(v);
  } catch (const Error&) {
    invalid(key, v, "not an integer");
  }
  if (n < min) invalid(key, v, "must be >= " + std::to_string(min));
  return n;
}

double as_real(const std::string& key, const std::string& v) {
  try {
    return text::parse_real(v);
  } catch (const Error&) {
    invalid(key, v, "not a number");
  }
}

bool as_bool(const std::string& key, const std::string& v) {
  auto s = text::to_lower(v);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  invalid(key, v, "not a boolean");
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& v) {
  auto& tc = cfg.train;
  if (key == "manifest") {
    cfg.manifest = v;
  } else if (key == "output_dir") {
    if (v.empty()) invalid(key, v, "must not be empty");
    cfg.output_dir = v;
  } else if (key == "epochs") {
    tc.epochs = static_cast<int>(as_int(key, v, 1));
  } else if (key == "batch_size") {
    tc.batch_size = static_cast<std::size_t>(as_int(key, v, 1));
  } else if (key == "learning_rate") {
    tc.learning_rate = as_real(key, v);
    if (!(tc.learning_rate >= 0.0)) invalid(key, v, "must be >= 0");
  } else if (key == "seed") {
    tc.seed = static_cast<std::uint64_t>(as_int(key, v, 0));
  } else if (key == "split_seed") {
    cfg.split_seed = static_cast<std::uint64_t>(as_int(key, v, 0));
  } else if (key == "archs" || key == "arch") {
    cfg.archs.clear();
    for (const auto& part : text::split(v, ',')) {
      if (text::trim(part).empty()) continue;
      try {
        cfg.archs.push_back(parse_arch(part));
      } catch (const Error& e) {
        invalid(key, v, e.detail());
      }
    }
    if (cfg.archs.empty()) invalid(key, v, "architecture list is empty");
  } else if (key == "pretrained") {
    tc.model.pretrained = as_bool(key, v);
  } else if (key == "freeze_backbone") {
    tc.model.freeze_backbone = as_bool(key, v);
  } else if (key == "ablation") {
    cfg.ablation = as_bool(key, v);
  } else if (key == "deterministic") {
    cfg.deterministic = as_bool(key, v);
  } else if (key == "parallel") {
    cfg.parallel = as_bool(key, v);
  } else if (key == "input_side") {
    tc.model.input_side = static_cast<int>(as_int(key, v, 64));
  } else if (key == "augment") {
    tc.augment = as_bool(key, v);
  } else if (key == "flip_prob") {
    tc.augmentation.horizontal_flip_prob = as_real(key, v);
  } else if (key == "rotation_max") {
    tc.augmentation.rotation_max_degrees = as_real(key, v);
  } else if (key == "weights_dir") {
    tc.model.weights_dir = v;
  } else if (key == "checkpoint") {
    cfg.checkpoints.clear();
    for (const auto& part : text::split(v, ',')) {
      if (!text::trim(part).empty()) cfg.checkpoints.emplace_back(std::string(text::trim(part)));
    }
  } else if (key == "eval_splits") {
    cfg.eval_splits.clear();
    for (const auto& part : text::split(v, ',')) {
      if (text::trim(part).empty()) continue;
      try {
        cfg.eval_splits.push_back(parse_split_name(part));
      } catch (const Error& e) {
        invalid(key, v, e.detail());
      }
    }
    if (cfg.eval_splits.empty()) invalid(key, v, "no splits given");
  } else if (key == "synth_samples") {
    cfg.synth_samples = static_cast<std::size_t>(as_int(key, v, 12));
  } else if (key == "synth_seed") {
    cfg.synth_seed = static_cast<std::uint64_t>(as_int(key, v, 0));
  } else if (key == "synth_side") {
    cfg.synth_side = static_cast<int>(as_int(key, v, 16));
  } else {
    throw Error(ErrorCode::UnknownKey, "'" + key + "'");
  }
}

}  // namespace

ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg;
  std::map<std::string, std::string> merged;
  if (file) merged = parse_key_values(text::read_file(*file));
  for (const auto& [k, v] : overrides) {
    auto key = text::to_lower(k);
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw Error(ErrorCode::UnknownKey, "'" + k + "'");
    if (key == "arch") merged.erase("archs");
    if (key == "archs") merged.erase("arch");
    merged[key] = v;
  }
  for (const auto& [k, v] : merged) apply(cfg, k, v);

  try {
    cfg.train.augmentation.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidValue, e.detail());
  }
  if (cfg.train.model.freeze_backbone && !cfg.train.model.pretrained) {
    // A scratch backbone is always trained; an explicit freeze request is an error.
    if (merged.contains("freeze_backbone")) {
      throw Error(ErrorCode::InvalidValue, "freeze_backbone=true requires pretrained=true");
    }
    cfg.train.model.freeze_backbone = false;
  }
  return cfg;
}

}  // namespace porcelain
