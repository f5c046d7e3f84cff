#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string_view>

#include <torch/torch.h>

namespace porcelain {

enum class Arch { ResNet50, MobileNetV2, VGG16, InceptionV3 };

inline constexpr std::array<Arch, 4> kAllArchs = {Arch::ResNet50, Arch::MobileNetV2, Arch::VGG16,
                                                  Arch::InceptionV3};

std::string_view arch_name(Arch a);          // "resnet50", ...
std::string_view arch_display_name(Arch a);  // "ResNet50", ...
Arch parse_arch(std::string_view name);      // throws UnknownArch

// Feature extractor with its top classifier removed. Parameter names follow
// the torchvision layout so torchvision state dicts load directly.
class BackboneImpl : public torch::nn::Module {
 public:
  virtual torch::Tensor forward(torch::Tensor x) = 0;
  // Channel count of the spatial map, or width of the pooled vector.
  virtual std::int64_t out_channels() const = 0;
  // True when forward() returns B x C (global pooling already applied).
  virtual bool pooled() const { return false; }
  virtual int min_input_side() const { return 32; }
  // Random initialisation matching torchvision's scratch models.
  virtual void reset_weights() = 0;
};

using Backbone = std::shared_ptr<BackboneImpl>;

// `transform_input` applies torchvision's ImageNet-to-[-1,1] re-normalisation
// used by the pretrained InceptionV3 weights; ignored by other architectures.
Backbone make_backbone(Arch arch, bool transform_input = false);

// Weight archives are pickled {name: tensor} dicts, as written by
// `torch.save(dict(model.state_dict()), path)`. Keys outside the backbone
// (classifier, fc, AuxLogits) are ignored. Throws WeightsUnavailable.
void load_backbone_weights(BackboneImpl& backbone, const std::filesystem::path& path);
void save_backbone_weights(BackboneImpl& backbone, const std::filesystem::path& path);

}  // namespace porcelain
