#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "porcelain/backbones.hpp"
#include "porcelain/bundles.hpp"
#include "porcelain/taxonomy.hpp"

namespace porcelain {

enum class HeadStyle {
  // conv 3x3 (512 ch, pad 1) -> batch norm -> ReLU -> global average pool -> linear
  Conv,
  // one linear layer on the pooled backbone vector
  FullyConnected,
};

HeadStyle head_style_for(Arch arch);

struct ModelSpec {
  Arch arch = Arch::MobileNetV2;
  bool pretrained = true;
  bool freeze_backbone = true;
  int input_side = 224;
  // Where `<arch>.pt` weight archives live. Empty means: $PORCELAIN_WEIGHTS_DIR,
  // then ~/.cache/porcelain/weights.
  std::filesystem::path weights_dir;

  void validate() const;  // throws InvalidSpec
};

std::filesystem::path resolve_weights_dir(const std::filesystem::path& configured);
std::filesystem::path pretrained_weights_path(Arch arch, const std::filesystem::path& configured_dir);

class TaskHeadImpl : public torch::nn::Module {
 public:
  TaskHeadImpl(std::int64_t in_channels, std::int64_t num_categories, HeadStyle style);

  torch::Tensor forward(const torch::Tensor& features);

  HeadStyle style() const { return style_; }
  std::int64_t num_categories() const { return num_categories_; }

 private:
  HeadStyle style_;
  std::int64_t num_categories_;
  torch::nn::Conv2d conv_{nullptr};
  torch::nn::BatchNorm2d bn_{nullptr};
  torch::nn::Linear fc_{nullptr};
};
TORCH_MODULE(TaskHead);

// Throws InvalidChannels (in_channels < 1) or InvalidSpec (num_categories < 2).
TaskHead build_task_head(std::int64_t in_channels, std::int64_t num_categories, HeadStyle style);

// Shared backbone feeding four parallel task heads. When the backbone is frozen
// its parameters do not require gradients and it stays in inference mode even
// while the heads train.
class MultiTaskNetImpl : public torch::nn::Module {
 public:
  MultiTaskNetImpl(const ModelSpec& spec, const TaskTaxonomy& taxonomy);

  // Throws ShapeMismatch unless batch is B x 3 x side x side.
  LogitsBundle forward(const torch::Tensor& batch);
  torch::Tensor features(const torch::Tensor& batch);
  LogitsBundle heads_forward(const torch::Tensor& features);

  void train(bool on = true) override;

  const ModelSpec& spec() const { return spec_; }
  BackboneImpl& backbone() { return *backbone_; }
  TaskHeadImpl& head(TaskId t) { return *heads_[task_index(t)]; }

  std::vector<torch::Tensor> trainable_parameters();
  // Re-lays 4-D weights out as channels-last, the faster CPU convolution path.
  void to_channels_last();

 private:
  ModelSpec spec_;
  Backbone backbone_;
  std::array<TaskHead, kNumTasks> heads_{TaskHead(nullptr), TaskHead(nullptr), TaskHead(nullptr),
                                         TaskHead(nullptr)};
};
TORCH_MODULE(MultiTaskNet);

// Builds a fresh model. With `pretrained`, backbone weights come from the
// weight cache (WeightsUnavailable if absent); heads are always freshly
// initialised. Throws InvalidSpec, UnknownArch, WeightsUnavailable.
MultiTaskNet build_model(const ModelSpec& spec, const TaskTaxonomy& taxonomy);

struct ComponentParams {
  std::string component;  // "backbone" or a task name
  std::int64_t trainable = 0;
  std::int64_t frozen = 0;

  std::int64_t total() const { return trainable + frozen; }
};

struct ParameterReport {
  std::vector<ComponentParams> components;  // backbone first, then heads in task order

  std::int64_t trainable() const;
  std::int64_t frozen() const;
  std::int64_t total() const { return trainable() + frozen(); }
};

ParameterReport parameter_report(MultiTaskNetImpl& model);

}  // namespace porcelain
