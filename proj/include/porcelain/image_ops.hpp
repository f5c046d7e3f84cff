#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <random>

#include <opencv2/core.hpp>
#include <torch/torch.h>

namespace porcelain {

struct AugmentSpec {
  double horizontal_flip_prob = 0.5;
  double rotation_max_degrees = 15.0;

  void validate() const;  // throws InvalidSpec
};

struct PreprocessSpec {
  int target_side = 224;
  // ImageNet statistics, matching the pretrained backbones.
  std::array<float, 3> channel_means{0.485f, 0.456f, 0.406f};
  std::array<float, 3> channel_stds{0.229f, 0.224f, 0.225f};
  std::optional<AugmentSpec> augmentation;

  void validate() const;  // throws InvalidSpec
};

// Decodes to 8-bit RGB. Grayscale is promoted and EXIF orientation honoured.
// Throws UndecodableImage.
cv::Mat decode_image(const std::filesystem::path& path);

// Direct rescale to side x side; no aspect-preserving crop. Throws ZeroSizeImage.
cv::Mat resize_square(const cv::Mat& rgb, int side);

// Rescale, scale to [0,1], normalise per channel. Returns float 3 x side x side.
torch::Tensor preprocess_image(const cv::Mat& rgb, const PreprocessSpec& spec);

// Horizontal mirror with probability flip_prob, then rotation by a uniform
// angle in [-max, max] about the centre, zero border fill. Size preserved.
cv::Mat augment_image(const cv::Mat& rgb, const AugmentSpec& spec, std::mt19937_64& rng);

}  // namespace porcelain
