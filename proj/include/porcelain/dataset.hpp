#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "porcelain/bundles.hpp"
#include "porcelain/image_ops.hpp"
#include "porcelain/record.hpp"

namespace porcelain {

struct Batch {
  torch::Tensor images;  // B x 3 x side x side
  TargetBundle targets;
};

// Random source for one sample's augmentation, derived from the global seed,
// the sample id and the epoch so results do not depend on batch composition.
std::mt19937_64 sample_rng(std::uint64_t global_seed, std::string_view sample_id, std::uint64_t epoch);

// Lazily decoded view over a split subset. Augmentation is applied only when
// `spec.augmentation` is set; the caller wires it for the train split alone.
// Decoded images are cached at the target side. Not safe for concurrent use.
class ImageDataset {
 public:
  ImageDataset(std::vector<SampleRecord> records, const TaskTaxonomy& taxonomy, PreprocessSpec spec,
               std::uint64_t seed);

  std::size_t size() const { return records_.size(); }
  const std::vector<SampleRecord>& records() const { return records_; }
  const std::vector<EncodedLabels>& labels() const { return labels_; }
  const PreprocessSpec& spec() const { return spec_; }

  torch::Tensor load_image(std::size_t index, std::uint64_t epoch) const;
  Batch load(std::span<const std::size_t> indices, std::uint64_t epoch) const;

  // Contiguous index batches in order, or shuffled by (seed, epoch).
  std::vector<std::vector<std::size_t>> batches(std::size_t batch_size, bool shuffle, std::uint64_t epoch) const;

 private:
  const cv::Mat& decoded(std::size_t index) const;

  std::vector<SampleRecord> records_;
  std::vector<EncodedLabels> labels_;
  PreprocessSpec spec_;
  std::uint64_t seed_;
  mutable std::vector<cv::Mat> cache_;
};

}  // namespace porcelain
