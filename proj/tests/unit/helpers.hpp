#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "invlab/core/image.hpp"
#include "invlab/core/rng.hpp"

namespace invlab::testutil {

inline Image random_image(ImageShape shape, Rng& rng) {
  Image img(shape);
  for (auto& p : img.data()) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

/// Fresh, empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("invlab-" + tag + "-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
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

 private:
  std::filesystem::path path_;
};

}  // namespace invlab::testutil
