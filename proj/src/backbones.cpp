#include "porcelain/backbones.hpp"

#include <fstream>
#include <iterator>

#include "porcelain/error.hpp"
#include "porcelain/text_util.hpp"

namespace porcelain {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

std::string_view arch_name(Arch a) {
  switch (a) {
    case Arch::ResNet50: return "resnet50";
    case Arch::MobileNetV2: return "mobilenetv2";
    case Arch::VGG16: return "vgg16";
    case Arch::InceptionV3: return "inceptionv3";
  }
  return "?";
}

std::string_view arch_display_name(Arch a) {
  switch (a) {
    case Arch::ResNet50: return "ResNet50";
    case Arch::MobileNetV2: return "MobileNetV2";
    case Arch::VGG16: return "VGG16";
    case Arch::InceptionV3: return "InceptionV3";
  }
  return "?";
}

Arch parse_arch(std::string_view name) {
  auto key = text::to_lower(text::trim(name));
  for (auto a : kAllArchs) {
    if (arch_name(a) == key) return a;
  }
  throw Error(ErrorCode::UnknownArch,
              "'" + std::string(name) + "' (valid: resnet50, mobilenetv2, vgg16, inceptionv3)");
}

namespace {

void kaiming_fan_out(nn::Module& root) {
  for (auto& m : root.modules(/*include_self=*/false)) {
    if (auto* conv = m->as<nn::Conv2d>()) {
      nn::init::kaiming_normal_(conv->weight, 0.0, torch::kFanOut, torch::kReLU);
      if (conv->bias.defined()) nn::init::zeros_(conv->bias);
    } else if (auto* bn = m->as<nn::BatchNorm2d>()) {
      nn::init::ones_(bn->weight);
      nn::init::zeros_(bn->bias);
    }
  }
}

nn::Conv2d conv(std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t stride = 1, std::int64_t pad = 0,
                std::int64_t groups = 1, bool bias = false) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride).padding(pad).groups(groups).bias(bias));
}

// ---------------------------------------------------------------- ResNet50

class BottleneckImpl : public nn::Module {
 public:
  BottleneckImpl(std::int64_t in, std::int64_t planes, std::int64_t stride) {
    const std::int64_t out = planes * 4;
    conv1_ = register_module("conv1", conv(in, planes, 1));
    bn1_ = register_module("bn1", nn::BatchNorm2d(planes));
    conv2_ = register_module("conv2", conv(planes, planes, 3, stride, 1));
    bn2_ = register_module("bn2", nn::BatchNorm2d(planes));
    conv3_ = register_module("conv3", conv(planes, out, 1));
    bn3_ = register_module("bn3", nn::BatchNorm2d(out));
    if (stride != 1 || in != out) {
      downsample_ = register_module("downsample", nn::Sequential(conv(in, out, 1, stride), nn::BatchNorm2d(out)));
    }
  }

  torch::Tensor forward(const torch::Tensor& x) {
    auto y = torch::relu(bn1_(conv1_(x)));
    y = torch::relu(bn2_(conv2_(y)));
    y = bn3_(conv3_(y));
    auto identity = downsample_ ? downsample_->forward(x) : x;
    return torch::relu(y + identity);
  }

 private:
  nn::Conv2d conv1_{nullptr}, conv2_{nullptr}, conv3_{nullptr};
  nn::BatchNorm2d bn1_{nullptr}, bn2_{nullptr}, bn3_{nullptr};
  nn::Sequential downsample_{nullptr};
};
TORCH_MODULE(Bottleneck);

class ResNet50Impl : public BackboneImpl {
 public:
  ResNet50Impl() {
    conv1_ = register_module("conv1", conv(3, 64, 7, 2, 3));
    bn1_ = register_module("bn1", nn::BatchNorm2d(64));
    std::int64_t in = 64;
    const std::int64_t planes[4] = {64, 128, 256, 512};
    const int blocks[4] = {3, 4, 6, 3};
    for (int s = 0; s < 4; ++s) {
      nn::Sequential stage;
      for (int b = 0; b < blocks[s]; ++b) {
        stage->push_back(Bottleneck(in, planes[s], (b == 0 && s > 0) ? 2 : 1));
        in = planes[s] * 4;
      }
      layers_[s] = register_module("layer" + std::to_string(s + 1), stage);
    }
    reset_weights();
  }

  torch::Tensor forward(torch::Tensor x) override {
    x = torch::relu(bn1_(conv1_(x)));
    x = F::max_pool2d(x, F::MaxPool2dFuncOptions(3).stride(2).padding(1));
    for (auto& stage : layers_) x = stage->forward(x);
    return x;
  }

  std::int64_t out_channels() const override { return 2048; }
  void reset_weights() override { kaiming_fan_out(*this); }

 private:
  nn::Conv2d conv1_{nullptr};
  nn::BatchNorm2d bn1_{nullptr};
  std::array<nn::Sequential, 4> layers_{nn::Sequential(nullptr), nn::Sequential(nullptr), nn::Sequential(nullptr),
                                        nn::Sequential(nullptr)};
};

// ------------------------------------------------------------- MobileNetV2

// Sequential with a concrete forward so it can nest inside another Sequential.
class ConvBNReLU6Impl : public nn::SequentialImpl {
 public:
  ConvBNReLU6Impl(std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t stride = 1, std::int64_t groups = 1) {
    push_back(conv(in, out, k, stride, (k - 1) / 2, groups));
    push_back(nn::BatchNorm2d(out));
  }
  torch::Tensor forward(torch::Tensor x) { return torch::clamp(nn::SequentialImpl::forward(x), 0.0, 6.0); }
};
TORCH_MODULE(ConvBNReLU6);

// Same trick for the inverted residual body.
class BlockSequentialImpl : public nn::SequentialImpl {
 public:
  torch::Tensor forward(torch::Tensor x) { return nn::SequentialImpl::forward(x); }
};
TORCH_MODULE(BlockSequential);

class InvertedResidualImpl : public nn::Module {
 public:
  InvertedResidualImpl(std::int64_t in, std::int64_t out, std::int64_t stride, std::int64_t expand)
      : use_residual_(stride == 1 && in == out) {
    const std::int64_t hidden = in * expand;
    BlockSequential body;
    if (expand != 1) body->push_back(ConvBNReLU6(in, hidden, 1));
    body->push_back(ConvBNReLU6(hidden, hidden, 3, stride, hidden));
    body->push_back(conv(hidden, out, 1));
    body->push_back(nn::BatchNorm2d(out));
    conv_ = register_module("conv", body);
  }

  torch::Tensor forward(const torch::Tensor& x) {
    auto y = conv_->forward(x);
    return use_residual_ ? x + y : y;
  }

 private:
  bool use_residual_;
  BlockSequential conv_{nullptr};
};
TORCH_MODULE(InvertedResidual);

class MobileNetV2Impl : public BackboneImpl {
 public:
  MobileNetV2Impl() {
    // expansion, channels, repeats, first stride
    const int settings[7][4] = {{1, 16, 1, 1}, {6, 24, 2, 2}, {6, 32, 3, 2}, {6, 64, 4, 2},
                                {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1}};
    nn::Sequential features;
    features->push_back(ConvBNReLU6(3, 32, 3, 2));
    std::int64_t in = 32;
    for (const auto& s : settings) {
      for (int i = 0; i < s[2]; ++i) {
        features->push_back(InvertedResidual(in, s[1], i == 0 ? s[3] : 1, s[0]));
        in = s[1];
      }
    }
    features->push_back(ConvBNReLU6(in, 1280, 1));
    features_ = register_module("features", features);
    reset_weights();
  }

  torch::Tensor forward(torch::Tensor x) override { return features_->forward(x); }
  std::int64_t out_channels() const override { return 1280; }
  void reset_weights() override { kaiming_fan_out(*this); }

 private:
  nn::Sequential features_{nullptr};
};

// ------------------------------------------------------------------ VGG16

class VGG16Impl : public BackboneImpl {
 public:
  VGG16Impl() {
    const int cfg[] = {64, 64, 0, 128, 128, 0, 256, 256, 256, 0, 512, 512, 512, 0, 512, 512, 512, 0};
    nn::Sequential features;
    std::int64_t in = 3;
    for (int c : cfg) {
      if (c == 0) {
        features->push_back(nn::MaxPool2d(nn::MaxPool2dOptions(2).stride(2)));
      } else {
        features->push_back(conv(in, c, 3, 1, 1, 1, /*bias=*/true));
        features->push_back(nn::ReLU());
        in = c;
      }
    }
    features_ = register_module("features", features);
    reset_weights();
  }

  torch::Tensor forward(torch::Tensor x) override { return features_->forward(x); }
  std::int64_t out_channels() const override { return 512; }
  void reset_weights() override { kaiming_fan_out(*this); }

 private:
  nn::Sequential features_{nullptr};
};

// ------------------------------------------------------------ InceptionV3

using K2 = std::array<std::int64_t, 2>;

class BasicConv2dImpl : public nn::Module {
 public:
  BasicConv2dImpl(std::int64_t in, std::int64_t out, std::array<std::int64_t, 2> k,
                  std::array<std::int64_t, 2> stride = {1, 1}, std::array<std::int64_t, 2> pad = {0, 0}) {
    conv_ = register_module(
        "conv", nn::Conv2d(nn::Conv2dOptions(in, out, {k[0], k[1]}).stride({stride[0], stride[1]})
                               .padding({pad[0], pad[1]}).bias(false)));
    bn_ = register_module("bn", nn::BatchNorm2d(nn::BatchNorm2dOptions(out).eps(0.001)));
  }
  BasicConv2dImpl(std::int64_t in, std::int64_t out, std::int64_t k, std::int64_t stride = 1, std::int64_t pad = 0)
      : BasicConv2dImpl(in, out, {k, k}, {stride, stride}, {pad, pad}) {}

  torch::Tensor forward(const torch::Tensor& x) { return torch::relu(bn_(conv_(x))); }

 private:
  nn::Conv2d conv_{nullptr};
  nn::BatchNorm2d bn_{nullptr};
};
TORCH_MODULE(BasicConv2d);

torch::Tensor avg3(const torch::Tensor& x) {
  return F::avg_pool2d(x, F::AvgPool2dFuncOptions(3).stride(1).padding(1));
}
torch::Tensor max3s2(const torch::Tensor& x) { return F::max_pool2d(x, F::MaxPool2dFuncOptions(3).stride(2)); }

class InceptionAImpl : public nn::Module {
 public:
  InceptionAImpl(std::int64_t in, std::int64_t pool_features)
      : b1x1_(register_module("branch1x1", BasicConv2d(in, 64, 1))),
        b5x5_1_(register_module("branch5x5_1", BasicConv2d(in, 48, 1))),
        b5x5_2_(register_module("branch5x5_2", BasicConv2d(48, 64, 5, 1, 2))),
        b3dbl_1_(register_module("branch3x3dbl_1", BasicConv2d(in, 64, 1))),
        b3dbl_2_(register_module("branch3x3dbl_2", BasicConv2d(64, 96, 3, 1, 1))),
        b3dbl_3_(register_module("branch3x3dbl_3", BasicConv2d(96, 96, 3, 1, 1))),
        bpool_(register_module("branch_pool", BasicConv2d(in, pool_features, 1))) {}

  torch::Tensor forward(const torch::Tensor& x) {
    return torch::cat({b1x1_(x), b5x5_2_(b5x5_1_(x)), b3dbl_3_(b3dbl_2_(b3dbl_1_(x))), bpool_(avg3(x))}, 1);
  }

 private:
  BasicConv2d b1x1_, b5x5_1_, b5x5_2_, b3dbl_1_, b3dbl_2_, b3dbl_3_, bpool_;
};
TORCH_MODULE(InceptionA);

class InceptionBImpl : public nn::Module {
 public:
  explicit InceptionBImpl(std::int64_t in)
      : b3x3_(register_module("branch3x3", BasicConv2d(in, 384, 3, 2))),
        b3dbl_1_(register_module("branch3x3dbl_1", BasicConv2d(in, 64, 1))),
        b3dbl_2_(register_module("branch3x3dbl_2", BasicConv2d(64, 96, 3, 1, 1))),
        b3dbl_3_(register_module("branch3x3dbl_3", BasicConv2d(96, 96, 3, 2))) {}

  torch::Tensor forward(const torch::Tensor& x) {
    return torch::cat({b3x3_(x), b3dbl_3_(b3dbl_2_(b3dbl_1_(x))), max3s2(x)}, 1);
  }

 private:
  BasicConv2d b3x3_, b3dbl_1_, b3dbl_2_, b3dbl_3_;
};
TORCH_MODULE(InceptionB);

class InceptionCImpl : public nn::Module {
 public:
  InceptionCImpl(std::int64_t in, std::int64_t c7)
      : b1x1_(register_module("branch1x1", BasicConv2d(in, 192, 1))),
        b7_1_(register_module("branch7x7_1", BasicConv2d(in, c7, 1))),
        b7_2_(register_module("branch7x7_2", BasicConv2d(c7, c7, K2{1, 7}, K2{1, 1}, K2{0, 3}))),
        b7_3_(register_module("branch7x7_3", BasicConv2d(c7, 192, K2{7, 1}, K2{1, 1}, K2{3, 0}))),
        b7dbl_1_(register_module("branch7x7dbl_1", BasicConv2d(in, c7, 1))),
        b7dbl_2_(register_module("branch7x7dbl_2", BasicConv2d(c7, c7, K2{7, 1}, K2{1, 1}, K2{3, 0}))),
        b7dbl_3_(register_module("branch7x7dbl_3", BasicConv2d(c7, c7, K2{1, 7}, K2{1, 1}, K2{0, 3}))),
        b7dbl_4_(register_module("branch7x7dbl_4", BasicConv2d(c7, c7, K2{7, 1}, K2{1, 1}, K2{3, 0}))),
        b7dbl_5_(register_module("branch7x7dbl_5", BasicConv2d(c7, 192, K2{1, 7}, K2{1, 1}, K2{0, 3}))),
        bpool_(register_module("branch_pool", BasicConv2d(in, 192, 1))) {}

  torch::Tensor forward(const torch::Tensor& x) {
    auto b7 = b7_3_(b7_2_(b7_1_(x)));
    auto b7dbl = b7dbl_5_(b7dbl_4_(b7dbl_3_(b7dbl_2_(b7dbl_1_(x)))));
    return torch::cat({b1x1_(x), b7, b7dbl, bpool_(avg3(x))}, 1);
  }

 private:
  BasicConv2d b1x1_, b7_1_, b7_2_, b7_3_, b7dbl_1_, b7dbl_2_, b7dbl_3_, b7dbl_4_, b7dbl_5_, bpool_;
};
TORCH_MODULE(InceptionC);

class InceptionDImpl : public nn::Module {
 public:
  explicit InceptionDImpl(std::int64_t in)
      : b3_1_(register_module("branch3x3_1", BasicConv2d(in, 192, 1))),
        b3_2_(register_module("branch3x3_2", BasicConv2d(192, 320, 3, 2))),
        b7x3_1_(register_module("branch7x7x3_1", BasicConv2d(in, 192, 1))),
        b7x3_2_(register_module("branch7x7x3_2", BasicConv2d(192, 192, K2{1, 7}, K2{1, 1}, K2{0, 3}))),
        b7x3_3_(register_module("branch7x7x3_3", BasicConv2d(192, 192, K2{7, 1}, K2{1, 1}, K2{3, 0}))),
        b7x3_4_(register_module("branch7x7x3_4", BasicConv2d(192, 192, 3, 2))) {}

  torch::Tensor forward(const torch::Tensor& x) {
    return torch::cat({b3_2_(b3_1_(x)), b7x3_4_(b7x3_3_(b7x3_2_(b7x3_1_(x)))), max3s2(x)}, 1);
  }

 private:
  BasicConv2d b3_1_, b3_2_, b7x3_1_, b7x3_2_, b7x3_3_, b7x3_4_;
};
TORCH_MODULE(InceptionD);

class InceptionEImpl : public nn::Module {
 public:
  explicit InceptionEImpl(std::int64_t in)
      : b1x1_(register_module("branch1x1", BasicConv2d(in, 320, 1))),
        b3_1_(register_module("branch3x3_1", BasicConv2d(in, 384, 1))),
        b3_2a_(register_module("branch3x3_2a", BasicConv2d(384, 384, K2{1, 3}, K2{1, 1}, K2{0, 1}))),
        b3_2b_(register_module("branch3x3_2b", BasicConv2d(384, 384, K2{3, 1}, K2{1, 1}, K2{1, 0}))),
        b3dbl_1_(register_module("branch3x3dbl_1", BasicConv2d(in, 448, 1))),
        b3dbl_2_(register_module("branch3x3dbl_2", BasicConv2d(448, 384, 3, 1, 1))),
        b3dbl_3a_(register_module("branch3x3dbl_3a", BasicConv2d(384, 384, K2{1, 3}, K2{1, 1}, K2{0, 1}))),
        b3dbl_3b_(register_module("branch3x3dbl_3b", BasicConv2d(384, 384, K2{3, 1}, K2{1, 1}, K2{1, 0}))),
        bpool_(register_module("branch_pool", BasicConv2d(in, 192, 1))) {}

  torch::Tensor forward(const torch::Tensor& x) {
    auto b3 = b3_1_(x);
    b3 = torch::cat({b3_2a_(b3), b3_2b_(b3)}, 1);
    auto dbl = b3dbl_2_(b3dbl_1_(x));
    dbl = torch::cat({b3dbl_3a_(dbl), b3dbl_3b_(dbl)}, 1);
    return torch::cat({b1x1_(x), b3, dbl, bpool_(avg3(x))}, 1);
  }

 private:
  BasicConv2d b1x1_, b3_1_, b3_2a_, b3_2b_, b3dbl_1_, b3dbl_2_, b3dbl_3a_, b3dbl_3b_, bpool_;
};
TORCH_MODULE(InceptionE);

// The auxiliary classifier is not constructed: it feeds no task head.
class InceptionV3Impl : public BackboneImpl {
 public:
  explicit InceptionV3Impl(bool transform_input) : transform_input_(transform_input) {
    c1a_ = register_module("Conv2d_1a_3x3", BasicConv2d(3, 32, 3, 2));
    c2a_ = register_module("Conv2d_2a_3x3", BasicConv2d(32, 32, 3));
    c2b_ = register_module("Conv2d_2b_3x3", BasicConv2d(32, 64, 3, 1, 1));
    c3b_ = register_module("Conv2d_3b_1x1", BasicConv2d(64, 80, 1));
    c4a_ = register_module("Conv2d_4a_3x3", BasicConv2d(80, 192, 3));
    m5b_ = register_module("Mixed_5b", InceptionA(192, 32));
    m5c_ = register_module("Mixed_5c", InceptionA(256, 64));
    m5d_ = register_module("Mixed_5d", InceptionA(288, 64));
    m6a_ = register_module("Mixed_6a", InceptionB(288));
    m6b_ = register_module("Mixed_6b", InceptionC(768, 128));
    m6c_ = register_module("Mixed_6c", InceptionC(768, 160));
    m6d_ = register_module("Mixed_6d", InceptionC(768, 160));
    m6e_ = register_module("Mixed_6e", InceptionC(768, 192));
    m7a_ = register_module("Mixed_7a", InceptionD(768));
    m7b_ = register_module("Mixed_7b", InceptionE(1280));
    m7c_ = register_module("Mixed_7c", InceptionE(2048));
    reset_weights();
  }

  torch::Tensor forward(torch::Tensor x) override {
    if (transform_input_) {
      auto c0 = x.select(1, 0).unsqueeze(1) * (0.229 / 0.5) + (0.485 - 0.5) / 0.5;
      auto c1 = x.select(1, 1).unsqueeze(1) * (0.224 / 0.5) + (0.456 - 0.5) / 0.5;
      auto c2 = x.select(1, 2).unsqueeze(1) * (0.225 / 0.5) + (0.406 - 0.5) / 0.5;
      x = torch::cat({c0, c1, c2}, 1);
    }
    x = c2b_(c2a_(c1a_(x)));
    x = max3s2(x);
    x = c4a_(c3b_(x));
    x = max3s2(x);
    x = m5d_(m5c_(m5b_(x)));
    x = m6e_(m6d_(m6c_(m6b_(m6a_(x)))));
    x = m7c_(m7b_(m7a_(x)));
    return F::adaptive_avg_pool2d(x, F::AdaptiveAvgPool2dFuncOptions(1)).flatten(1);
  }

  std::int64_t out_channels() const override { return 2048; }
  bool pooled() const override { return true; }
  int min_input_side() const override { return 75; }

  void reset_weights() override {
    torch::NoGradGuard guard;
    for (auto& m : modules(/*include_self=*/false)) {
      if (auto* c = m->as<nn::Conv2d>()) {
        c->weight.normal_(0.0, 0.1).clamp_(-2.0, 2.0);
      } else if (auto* bn = m->as<nn::BatchNorm2d>()) {
        nn::init::ones_(bn->weight);
        nn::init::zeros_(bn->bias);
      }
    }
  }

 private:
  bool transform_input_;
  BasicConv2d c1a_{nullptr}, c2a_{nullptr}, c2b_{nullptr}, c3b_{nullptr}, c4a_{nullptr};
  InceptionA m5b_{nullptr}, m5c_{nullptr}, m5d_{nullptr};
  InceptionB m6a_{nullptr};
  InceptionC m6b_{nullptr}, m6c_{nullptr}, m6d_{nullptr}, m6e_{nullptr};
  InceptionD m7a_{nullptr};
  InceptionE m7b_{nullptr}, m7c_{nullptr};
};

}  // namespace

Backbone make_backbone(Arch arch, bool transform_input) {
  switch (arch) {
    case Arch::ResNet50: return std::make_shared<ResNet50Impl>();
    case Arch::MobileNetV2: return std::make_shared<MobileNetV2Impl>();
    case Arch::VGG16: return std::make_shared<VGG16Impl>();
    case Arch::InceptionV3: return std::make_shared<InceptionV3Impl>(transform_input);
  }
  throw Error(ErrorCode::UnknownArch, "unhandled architecture");
}

void load_backbone_weights(BackboneImpl& backbone, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::WeightsUnavailable, "no weight archive at " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  c10::IValue value;
  try {
    value = torch::pickle_load(bytes);
  } catch (const c10::Error& e) {
    throw Error(ErrorCode::WeightsUnavailable, "cannot read " + path.string() + ": " + e.what_without_backtrace());
  }

  if (!value.isGenericDict()) throw Error(ErrorCode::WeightsUnavailable, path.string() + " is not a tensor dict");
  const auto dict = value.toGenericDict();

  torch::NoGradGuard guard;
  auto assign = [&](const std::string& name, torch::Tensor& target) {
    auto it = dict.find(name);
    if (it == dict.end() || !it->value().isTensor()) {
      throw Error(ErrorCode::WeightsUnavailable, path.filename().string() + " lacks '" + name + "'");
    }
    auto src = it->value().toTensor();
    if (src.sizes() != target.sizes()) {
      throw Error(ErrorCode::WeightsUnavailable, path.filename().string() + ": shape mismatch for '" + name + "'");
    }
    target.copy_(src.to(target.dtype()));
  };
  for (auto& item : backbone.named_parameters(/*recurse=*/true)) assign(item.key(), item.value());
  for (auto& item : backbone.named_buffers(/*recurse=*/true)) assign(item.key(), item.value());
}

void save_backbone_weights(BackboneImpl& backbone, const std::filesystem::path& path) {
  c10::Dict<std::string, torch::Tensor> dict;
  for (const auto& item : backbone.named_parameters(true)) dict.insert(item.key(), item.value().detach().clone());
  for (const auto& item : backbone.named_buffers(true)) dict.insert(item.key(), item.value().detach().clone());
  auto bytes = torch::pickle_save(c10::IValue(dict));
  text::write_file(path, std::string_view(bytes.data(), bytes.size()));
}

}  // namespace porcelain
