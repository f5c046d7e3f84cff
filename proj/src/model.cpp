#include "porcelain/model.hpp"

#include <cstdlib>

#include "porcelain/error.hpp"

namespace porcelain {

namespace nn = torch::nn;

HeadStyle head_style_for(Arch arch) {
  return arch == Arch::InceptionV3 ? HeadStyle::FullyConnected : HeadStyle::Conv;
}

void ModelSpec::validate() const {
  if (freeze_backbone && !pretrained) {
    throw Error(ErrorCode::InvalidSpec, "freeze_backbone requires pretrained weights");
  }
  const int min_side = arch == Arch::InceptionV3 ? 75 : 32;
  if (input_side < min_side) {
    throw Error(ErrorCode::InvalidSpec, std::string(arch_name(arch)) + " needs input_side >= " +
                                            std::to_string(min_side));
  }
}

std::filesystem::path resolve_weights_dir(const std::filesystem::path& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("PORCELAIN_WEIGHTS_DIR"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "porcelain" / "weights";
  }
  return std::filesystem::path(".porcelain-weights");
}

std::filesystem::path pretrained_weights_path(Arch arch, const std::filesystem::path& configured_dir) {
  return resolve_weights_dir(configured_dir) / (std::string(arch_name(arch)) + ".pt");
}

TaskHeadImpl::TaskHeadImpl(std::int64_t in_channels, std::int64_t num_categories, HeadStyle style)
    : style_(style), num_categories_(num_categories) {
  if (in_channels < 1) {
    throw Error(ErrorCode::InvalidChannels, "head input channels must be >= 1, got " + std::to_string(in_channels));
  }
  if (num_categories < 2) {
    throw Error(ErrorCode::InvalidSpec, "a head needs at least 2 categories");
  }
  std::int64_t fc_in = in_channels;
  if (style == HeadStyle::Conv) {
    conv_ = register_module("conv", nn::Conv2d(nn::Conv2dOptions(in_channels, 512, 3).padding(1)));
    bn_ = register_module("bn", nn::BatchNorm2d(512));
    fc_in = 512;
    nn::init::zeros_(conv_->bias);
  }
  fc_ = register_module("fc", nn::Linear(fc_in, num_categories));
  nn::init::zeros_(fc_->bias);
}

torch::Tensor TaskHeadImpl::forward(const torch::Tensor& features) {
  if (style_ == HeadStyle::FullyConnected) return fc_(features.dim() == 4 ? features.mean({2, 3}) : features);
  auto y = torch::relu(bn_(conv_(features)));
  y = nn::functional::adaptive_avg_pool2d(y, nn::functional::AdaptiveAvgPool2dFuncOptions(1)).flatten(1);
  return fc_(y);
}

TaskHead build_task_head(std::int64_t in_channels, std::int64_t num_categories, HeadStyle style) {
  return TaskHead(in_channels, num_categories, style);
}

MultiTaskNetImpl::MultiTaskNetImpl(const ModelSpec& spec, const TaskTaxonomy& taxonomy) : spec_(spec) {
  spec_.validate();
  backbone_ = register_module("backbone", make_backbone(spec_.arch, spec_.pretrained));
  const auto style = head_style_for(spec_.arch);
  for (auto t : kAllTasks) {
    heads_[task_index(t)] = register_module(
        "head_" + std::string(task_name(t)),
        build_task_head(backbone_->out_channels(), static_cast<std::int64_t>(taxonomy.task(t).size()), style));
  }
  if (spec_.freeze_backbone) {
    for (auto& p : backbone_->parameters()) p.set_requires_grad(false);
  }
  to_channels_last();
}

void MultiTaskNetImpl::to_channels_last() {
  torch::NoGradGuard guard;
  for (auto& p : parameters()) {
    if (p.dim() == 4) p.set_data(p.data().contiguous(torch::MemoryFormat::ChannelsLast));
  }
}

torch::Tensor MultiTaskNetImpl::features(const torch::Tensor& batch) {
  if (batch.dim() != 4 || batch.size(1) != 3 || batch.size(2) != spec_.input_side ||
      batch.size(3) != spec_.input_side || batch.size(0) < 1) {
    throw Error(ErrorCode::ShapeMismatch, "expected B x 3 x " + std::to_string(spec_.input_side) + " x " +
                                              std::to_string(spec_.input_side) + " batch");
  }
  const auto x = batch.contiguous(torch::MemoryFormat::ChannelsLast);
  if (spec_.freeze_backbone) {
    torch::NoGradGuard guard;
    return backbone_->forward(x);
  }
  return backbone_->forward(x);
}

LogitsBundle MultiTaskNetImpl::heads_forward(const torch::Tensor& features) {
  LogitsBundle out;
  for (auto t : kAllTasks) out.logits[task_index(t)] = heads_[task_index(t)]->forward(features);
  return out;
}

LogitsBundle MultiTaskNetImpl::forward(const torch::Tensor& batch) { return heads_forward(features(batch)); }

void MultiTaskNetImpl::train(bool on) {
  nn::Module::train(on);
  if (spec_.freeze_backbone) backbone_->eval();
}

std::vector<torch::Tensor> MultiTaskNetImpl::trainable_parameters() {
  std::vector<torch::Tensor> out;
  for (auto& p : parameters()) {
    if (p.requires_grad()) out.push_back(p);
  }
  return out;
}

MultiTaskNet build_model(const ModelSpec& spec, const TaskTaxonomy& taxonomy) {
  MultiTaskNet net(spec, taxonomy);
  if (spec.pretrained) {
    load_backbone_weights(net->backbone(), pretrained_weights_path(spec.arch, spec.weights_dir));
  }
  return net;
}

std::int64_t ParameterReport::trainable() const {
  std::int64_t n = 0;
  for (const auto& c : components) n += c.trainable;
  return n;
}

std::int64_t ParameterReport::frozen() const {
  std::int64_t n = 0;
  for (const auto& c : components) n += c.frozen;
  return n;
}

namespace {

ComponentParams count_params(const std::string& name, nn::Module& m) {
  ComponentParams c{name, 0, 0};
  for (const auto& p : m.parameters()) (p.requires_grad() ? c.trainable : c.frozen) += p.numel();
  return c;
}

}  // namespace

ParameterReport parameter_report(MultiTaskNetImpl& model) {
  ParameterReport r;
  r.components.push_back(count_params("backbone", model.backbone()));
  for (auto t : kAllTasks) r.components.push_back(count_params(std::string(task_name(t)), model.head(t)));
  return r;
}

}  // namespace porcelain
