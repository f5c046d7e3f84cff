#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "porcelain/image_ops.hpp"
#include "porcelain/model.hpp"

namespace porcelain {

// Sidecar written next to best.ckpt as flat key=value text.
struct RunDescriptor {
  std::string label;  // model display label used in reports
  ModelSpec spec;
  PreprocessSpec preprocess;  // augmentation not recorded
  std::string taxonomy_fingerprint;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
};

std::string descriptor_to_text(const RunDescriptor& d);
RunDescriptor descriptor_from_text(std::string_view text);  // throws ParseError

void save_weights(MultiTaskNetImpl& model, const std::filesystem::path& path);
void load_weights(MultiTaskNetImpl& model, const std::filesystem::path& path);  // throws IoError

struct LoadedCheckpoint {
  RunDescriptor descriptor;
  MultiTaskNet model{nullptr};
};

// Reads <run_dir>/spec.txt and <run_dir>/best.ckpt. Pretrained weights are not
// re-fetched; the checkpoint carries the full model. Throws CheckpointMismatch
// when the taxonomy fingerprint differs from `taxonomy`.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& run_dir, const TaskTaxonomy& taxonomy);

}  // namespace porcelain
