#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "porcelain/backbones.hpp"
#include "porcelain/split.hpp"
#include "porcelain/train.hpp"

namespace porcelain {

struct ExperimentConfig {
  std::filesystem::path manifest;
  std::filesystem::path output_dir = "runs";
  TrainConfig train;
  std::uint64_t split_seed = 42;
  std::vector<Arch> archs{Arch::MobileNetV2};
  bool ablation = false;
  bool deterministic = true;
  bool parallel = false;
  // evaluate: run directories to score (empty = every run under output_dir)
  std::vector<std::filesystem::path> checkpoints;
  std::vector<SplitName> eval_splits{SplitName::Val, SplitName::Test};
  // synth
  std::size_t synth_samples = 240;
  std::uint64_t synth_seed = 7;
  int synth_side = 96;
};

// Keys accepted in config files and (with '-' for '_') as --flags.
const std::vector<std::string>& config_keys();

// Flat "key = value" text; '#' starts a comment. Throws ParseError(line) and UnknownKey.
std::map<std::string, std::string> parse_key_values(std::string_view text);

// Resolves defaults, then file values, then overrides (highest precedence).
// Throws ParseError, UnknownKey, InvalidValue(key).
ExperimentConfig parse_config(const std::optional<std::filesystem::path>& file,
                              const std::map<std::string, std::string>& overrides);

}  // namespace porcelain
