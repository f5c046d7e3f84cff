// Loads torchvision-exported weights into each backbone and compares features
// with the reference computed by torchvision itself.
#include <fstream>
#include <iostream>
#include <iterator>

#include "porcelain/backbones.hpp"

using namespace porcelain;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: layout_check <reference dir>\n";
    return 2;
  }
  torch::set_num_threads(1);
  const std::filesystem::path dir = argv[1];
  int failures = 0;
  for (auto arch : kAllArchs) {
    const std::string name(arch_name(arch));
    auto net = make_backbone(arch, /*transform_input=*/false);
    load_backbone_weights(*net, dir / (name + ".pt"));
    net->eval();
    std::ifstream in(dir / (name + "_ref.pt"), std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto ref = torch::pickle_load(bytes).toGenericDict();
    auto x = ref.at("input").toTensor();
    auto want = ref.at("features").toTensor();
    torch::NoGradGuard guard;
    auto got = net->forward(x);
    // Random-init feature scales range from 1e-9 to 1e9, so the tolerance is relative to the largest value.
    const bool same_shape = got.sizes() == want.sizes();
    const double scale = want.abs().max().item<double>();
    const double err = same_shape ? (got - want).abs().max().item<double>() / scale : -1.0;
    const bool ok = same_shape && scale > 0.0 && err < 1e-4;
    std::cout << (ok ? "ok   " : "FAIL ") << name << " max relative diff " << err << "\n";
    failures += ok ? 0 : 1;
  }
  return failures;
}
