#include <doctest.h>

#include "porcelain/model.hpp"
#include "porcelain/train.hpp"
#include "support.hpp"

using namespace porcelain;
using porcelain::testing::error_code_of;
using porcelain::testing::TempDir;

namespace {

ModelSpec small_spec(Arch arch, bool pretrained, bool frozen, const std::filesystem::path& weights = {}) {
  ModelSpec s;
  s.arch = arch;
  s.pretrained = pretrained;
  s.freeze_backbone = frozen;
  s.input_side = arch == Arch::InceptionV3 ? 75 : 64;
  s.weights_dir = weights;
  return s;
}

}  // namespace

TEST_CASE("task heads") {
  auto conv = build_task_head(2048, 10, HeadStyle::Conv);
  conv->eval();
  CHECK((conv->forward(torch::randn({2, 2048, 3, 3})).sizes() == torch::IntArrayRef{2, 10}));
  CHECK((conv->forward(torch::randn({1, 2048, 7, 5})).sizes() == torch::IntArrayRef{1, 10}));
  auto fc = build_task_head(2048, 2, HeadStyle::FullyConnected);
  CHECK((fc->forward(torch::randn({3, 2048})).sizes() == torch::IntArrayRef{3, 2}));
  std::int64_t n = 0;
  for (const auto& p : fc->parameters()) n += p.numel();
  CHECK(n == 2048 * 2 + 2);  // a single affine map
  CHECK((error_code_of([] { build_task_head(0, 5, HeadStyle::Conv); }) == ErrorCode::InvalidChannels));
  CHECK((error_code_of([] { build_task_head(16, 1, HeadStyle::Conv); }) == ErrorCode::InvalidSpec));
}

TEST_CASE("head style per architecture") {
  CHECK(head_style_for(Arch::ResNet50) == HeadStyle::Conv);
  CHECK(head_style_for(Arch::MobileNetV2) == HeadStyle::Conv);
  CHECK(head_style_for(Arch::VGG16) == HeadStyle::Conv);
  CHECK(head_style_for(Arch::InceptionV3) == HeadStyle::FullyConnected);
  CHECK(parse_arch("ResNet50") == Arch::ResNet50);
  CHECK((error_code_of([] { parse_arch("resnet99"); }) == ErrorCode::UnknownArch));
}

TEST_CASE("model spec validation") {
  auto s = small_spec(Arch::InceptionV3, false, false);
  s.input_side = 64;
  CHECK((error_code_of([&] { s.validate(); }) == ErrorCode::InvalidSpec));
  auto f = small_spec(Arch::VGG16, false, true);
  CHECK((error_code_of([&] { f.validate(); }) == ErrorCode::InvalidSpec));
}

TEST_CASE("forward shapes and shared computation") {
  torch::manual_seed(0);
  auto m = build_model(small_spec(Arch::MobileNetV2, false, false), build_taxonomy());
  m->eval();
  torch::NoGradGuard guard;
  auto x = torch::randn({4, 3, 64, 64});
  auto out = m->forward(x);
  const std::int64_t widths[] = {2, 10, 8, 12};
  for (auto t : kAllTasks) CHECK((out[t].sizes() == torch::IntArrayRef{4, widths[task_index(t)]}));
  auto one = m->forward(x.slice(0, 0, 1));
  for (auto t : kAllTasks) CHECK(one[t].size(0) == 1);

  auto twins = torch::cat({x.slice(0, 0, 1), x.slice(0, 0, 1)});
  auto tw = m->forward(twins);
  for (auto t : kAllTasks) CHECK(torch::equal(tw[t][0], tw[t][1]));

  // Heads consume one shared feature tensor.
  auto feats = m->features(x);
  auto via_heads = m->heads_forward(feats);
  for (auto t : kAllTasks) CHECK(torch::allclose(via_heads[t], out[t]));

  CHECK((error_code_of([&] { m->forward(torch::randn({2, 3, 32, 32})); }) == ErrorCode::ShapeMismatch));
  CHECK((error_code_of([&] { m->forward(torch::randn({2, 1, 64, 64})); }) == ErrorCode::ShapeMismatch));
}

TEST_CASE("parameter report and freezing") {
  TempDir cache("weights");
  porcelain::testing::provision_weight_cache(cache.path(), Arch::MobileNetV2);
  auto frozen = build_model(small_spec(Arch::MobileNetV2, true, true, cache.path()), build_taxonomy());
  auto r = parameter_report(*frozen);
  REQUIRE(r.components.size() == 5);
  CHECK(r.components[0].component == "backbone");
  CHECK(r.components[0].trainable == 0);
  CHECK(r.components[0].frozen > 0);
  std::int64_t heads = 0;
  for (std::size_t i = 1; i < 5; ++i) heads += r.components[i].trainable;
  CHECK(r.trainable() == heads);
  std::int64_t all = 0, trainable = 0;
  for (const auto& p : frozen->parameters()) {
    all += p.numel();
    if (p.requires_grad()) trainable += p.numel();
  }
  CHECK(r.total() == all);
  CHECK(trainable == heads);

  // Frozen backbone stays in inference mode while heads train.
  frozen->train();
  CHECK_FALSE(frozen->backbone().is_training());
  CHECK(frozen->head(TaskId::Ware).is_training());

  auto scratch = build_model(small_spec(Arch::VGG16, false, false), build_taxonomy());
  auto rs = parameter_report(*scratch);
  CHECK(rs.frozen() == 0);
  CHECK(rs.components[0].trainable > 0);
}

TEST_CASE("pretrained weights are loaded from the cache") {
  TempDir cache("weights-load");
  porcelain::testing::provision_weight_cache(cache.path(), Arch::ResNet50);
  auto reference = make_backbone(Arch::ResNet50);
  load_backbone_weights(*reference, cache / "resnet50.pt");
  torch::manual_seed(99);
  auto m = build_model(small_spec(Arch::ResNet50, true, true, cache.path()), build_taxonomy());
  auto a = m->backbone().named_parameters();
  auto b = reference->named_parameters();
  for (const auto& item : b) CHECK(torch::equal(a[item.key()], item.value()));

  TempDir empty("weights-empty");
  CHECK((error_code_of([&] { build_model(small_spec(Arch::VGG16, true, true, empty.path()), build_taxonomy()); }) ==
        ErrorCode::WeightsUnavailable));
  // Wrong architecture in the archive is rejected, not silently partially loaded.
  std::filesystem::copy_file(cache / "resnet50.pt", empty / "vgg16.pt");
  CHECK((error_code_of([&] { build_model(small_spec(Arch::VGG16, true, true, empty.path()), build_taxonomy()); }) ==
        ErrorCode::WeightsUnavailable));
}
