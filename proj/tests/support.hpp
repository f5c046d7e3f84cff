#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "porcelain/backbones.hpp"
#include "porcelain/error.hpp"

namespace porcelain::testing {

// Fresh, empty directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("porcelain-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// Stand-in weight cache: freshly initialised backbones saved in the archive
// format the loader reads. Exercises the pretrained code path offline.
inline void provision_weight_cache(const std::filesystem::path& dir, Arch arch) {
  auto path = dir / (std::string(arch_name(arch)) + ".pt");
  if (std::filesystem::exists(path)) return;
  torch::manual_seed(1234);
  auto net = make_backbone(arch, /*transform_input=*/false);
  save_backbone_weights(*net, path);
}

template <class F>
ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a porcelain::Error");
}

}  // namespace porcelain::testing
