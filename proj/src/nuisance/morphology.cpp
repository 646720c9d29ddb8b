#include <algorithm>
#include <stdexcept>

#include "invlab/nuisance/transforms.hpp"

namespace invlab::nuisance {

namespace {

// Separable: a square all-ones window is a row pass followed by a column pass.
// `pad` is the neutral element of `pick`, so border samples are simply skipped.
template <typename Pick>
Image rank_filter(ImageView x, int kernel, std::uint8_t pad, Pick pick) {
  if (kernel < 1) throw std::invalid_argument("morphology kernel must be >= 1");
  const int h = x.height();
  const int w = x.width();
  const int ch = x.channels();
  const int lo = -morphology_anchor(kernel);
  const int hi = kernel - 1 + lo;

  Image rows(x.shape());
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int k = 0; k < ch; ++k) {
        std::uint8_t acc = pad;
        for (int d = lo; d <= hi; ++d) {
          const int jj = j + d;
          if (jj >= 0 && jj < w) acc = pick(acc, x.at(i, jj, k));
        }
        rows.at(i, j, k) = acc;
      }

  Image out(x.shape());
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int k = 0; k < ch; ++k) {
        std::uint8_t acc = pad;
        for (int d = lo; d <= hi; ++d) {
          const int ii = i + d;
          if (ii >= 0 && ii < h) acc = pick(acc, rows.at(ii, j, k));
        }
        out.at(i, j, k) = acc;
      }
  return out;
}

}  // namespace

int morphology_anchor(int kernel) { return (kernel - 1) / 2; }

Image dilate(ImageView x, int kernel) {
  return rank_filter(x, kernel, 0, [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

Image erode(ImageView x, int kernel) {
  return rank_filter(x, kernel, 255, [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

}  // namespace invlab::nuisance
