#include "porcelain/dataset.hpp"

#include <algorithm>
#include <numeric>

#include "porcelain/text_util.hpp"

namespace porcelain {

std::mt19937_64 sample_rng(std::uint64_t global_seed, std::string_view sample_id, std::uint64_t epoch) {
  const auto h = text::fnv1a64(sample_id);
  std::seed_seq seq{static_cast<std::uint32_t>(global_seed), static_cast<std::uint32_t>(global_seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  return std::mt19937_64(seq);
}

ImageDataset::ImageDataset(std::vector<SampleRecord> records, const TaskTaxonomy& taxonomy, PreprocessSpec spec,
                           std::uint64_t seed)
    : records_(std::move(records)), spec_(std::move(spec)), seed_(seed), cache_(records_.size()) {
  spec_.validate();
  labels_.reserve(records_.size());
  for (const auto& r : records_) labels_.push_back(encode_record(taxonomy, r));
}

const cv::Mat& ImageDataset::decoded(std::size_t index) const {
  auto& slot = cache_.at(index);
  if (slot.empty()) slot = resize_square(decode_image(records_[index].image_path), spec_.target_side);
  return slot;
}

torch::Tensor ImageDataset::load_image(std::size_t index, std::uint64_t epoch) const {
  const cv::Mat& base = decoded(index);
  if (spec_.augmentation) {
    auto rng = sample_rng(seed_, records_[index].sample_id, epoch);
    return preprocess_image(augment_image(base, *spec_.augmentation, rng), spec_);
  }
  return preprocess_image(base, spec_);
}

Batch ImageDataset::load(std::span<const std::size_t> indices, std::uint64_t epoch) const {
  std::vector<torch::Tensor> images;
  images.reserve(indices.size());
  std::array<std::vector<std::int64_t>, kNumTasks> targets;
  for (auto i : indices) {
    images.push_back(load_image(i, epoch));
    for (std::size_t t = 0; t < kNumTasks; ++t) targets[t].push_back(labels_[i][t]);
  }
  Batch batch;
  batch.images = torch::stack(images);
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    batch.targets.targets[t] = torch::tensor(targets[t], torch::kInt64);
  }
  return batch;
}

std::vector<std::vector<std::size_t>> ImageDataset::batches(std::size_t batch_size, bool shuffle,
                                                            std::uint64_t epoch) const {
  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    std::mt19937_64 rng(seed_ ^ (0x9e3779b97f4a7c15ULL * (epoch + 1)));
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    auto end = std::min(order.size(), start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

}  // namespace porcelain
