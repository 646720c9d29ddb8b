#include "invlab/core/image.hpp"

#include <stdexcept>

namespace invlab {

std::string to_string(const ImageShape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

ImageView::ImageView(ImageShape shape, std::span<const std::uint8_t> data)
    : shape_(shape), data_(data) {
  if (data.size() != shape.pixels())
    throw std::invalid_argument("image view size does not match shape " + to_string(shape));
}

Image::Image(ImageShape shape, std::uint8_t fill) : shape_(shape), data_(shape.pixels(), fill) {}

Image::Image(ImageShape shape, std::vector<std::uint8_t> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.pixels())
    throw std::invalid_argument("image buffer size does not match shape " + to_string(shape_));
}

Image::Image(ImageView view)
    : shape_(view.shape()), data_(view.data().begin(), view.data().end()) {}

}  // namespace invlab
