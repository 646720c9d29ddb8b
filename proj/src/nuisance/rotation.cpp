#include <cmath>

#include "invlab/nuisance/transforms.hpp"

namespace invlab::nuisance {

namespace {

// Coordinates within this distance of an integer are snapped, which makes
// quarter turns interpolation-free despite cos(pi/2) != 0 in floating point.
constexpr double kSnap = 1e-9;

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < kSnap ? r : v;
}

}  // namespace

std::vector<float> rotate_exact(ImageView x, double angle) {
  const int h = x.height();
  const int w = x.width();
  const int ch = x.channels();
  const double ci = (h - 1) / 2.0;
  const double cj = (w - 1) / 2.0;
  const double c = std::cos(angle);
  const double s = std::sin(angle);

  std::vector<float> out(x.shape().pixels(), 0.0f);
  auto read = [&](int i, int j, int k) -> double {
    if (i < 0 || j < 0 || i >= h || j >= w) return 0.0;
    return x.at(i, j, k);
  };

  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double di = i - ci;
      const double dj = j - cj;
      const double si = snap(ci + c * di + s * dj);
      const double sj = snap(cj - s * di + c * dj);
      const double fi0 = std::floor(si);
      const double fj0 = std::floor(sj);
      const int i0 = static_cast<int>(fi0);
      const int j0 = static_cast<int>(fj0);
      const double ti = si - fi0;
      const double tj = sj - fj0;
      for (int k = 0; k < ch; ++k) {
        double v = (1 - ti) * (1 - tj) * read(i0, j0, k);
        if (tj > 0) v += (1 - ti) * tj * read(i0, j0 + 1, k);
        if (ti > 0) v += ti * (1 - tj) * read(i0 + 1, j0, k);
        if (ti > 0 && tj > 0) v += ti * tj * read(i0 + 1, j0 + 1, k);
        out[(static_cast<std::size_t>(i) * w + j) * ch + k] = static_cast<float>(v);
      }
    }
  }
  return out;
}

Image rotate(ImageView x, double angle) {
  const std::vector<float> exact = rotate_exact(x, angle);
  Image out(x.shape());
  auto dst = out.data();
  for (std::size_t n = 0; n < exact.size(); ++n) {
    const float v = std::round(exact[n]);
    dst[n] = static_cast<std::uint8_t>(v < 0.f ? 0.f : (v > 255.f ? 255.f : v));
  }
  return out;
}

}  // namespace invlab::nuisance
