#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace invlab {

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  bool operator==(const ImageShape&) const = default;
};

std::string to_string(const ImageShape& s);

/// Non-owning view of an 8-bit HWC image.
class ImageView {
 public:
  ImageView(ImageShape shape, std::span<const std::uint8_t> data);

  const ImageShape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  std::span<const std::uint8_t> data() const { return data_; }

  std::uint8_t at(int row, int col, int ch = 0) const {
    return data_[(static_cast<std::size_t>(row) * shape_.width + col) * shape_.channels + ch];
  }

 private:
  ImageShape shape_;
  std::span<const std::uint8_t> data_;
};

/// Owning 8-bit HWC image.
class Image {
 public:
  Image() = default;
  explicit Image(ImageShape shape, std::uint8_t fill = 0);
  Image(ImageShape shape, std::vector<std::uint8_t> data);
  explicit Image(ImageView view);

  const ImageShape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t at(int row, int col, int ch = 0) const {
    return data_[index(row, col, ch)];
  }
  std::uint8_t& at(int row, int col, int ch = 0) { return data_[index(row, col, ch)]; }

  operator ImageView() const { return ImageView(shape_, data_); }  // NOLINT(google-explicit-constructor)

  bool operator==(const Image& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * shape_.width + col) * shape_.channels + ch;
  }

  ImageShape shape_;
  std::vector<std::uint8_t> data_;
};

inline bool equal(ImageView a, ImageView b) {
  return a.shape() == b.shape() &&
         std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

}  // namespace invlab
