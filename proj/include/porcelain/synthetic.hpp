#pragma once

#include <cstdint>
#include <filesystem>

#include <opencv2/core.hpp>

#include "porcelain/record.hpp"

namespace porcelain {

struct SyntheticOptions {
  int image_side = 96;
  double noise_sigma = 6.0;
};

// Renders one image whose four labels appear as independent cues:
// dynasty as a global brightness band, ware as a border pattern, glaze as the
// background hue and type as the centred shape. Returns 8-bit RGB.
cv::Mat render_synthetic_image(const EncodedLabels& labels, std::uint64_t seed, const SyntheticOptions& opts = {});

// Writes `n_samples` PNG images under out_dir/images plus out_dir/manifest.csv
// and returns the manifest path. Labels are drawn uniformly and independently
// per task. Output is a pure function of (n_samples, seed, opts).
// Throws InvalidSpec when n_samples < 12, IoError on write failure.
std::filesystem::path generate_synthetic_dataset(std::size_t n_samples, std::uint64_t seed,
                                                 const std::filesystem::path& out_dir,
                                                 const SyntheticOptions& opts = {});

}  // namespace porcelain
