#include "invlab/data/glyphs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace invlab::data {

namespace {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Stroke = std::array<Point, 4>;

constexpr int kCurveSegments = 20;
constexpr double kMinInk = 0.6;

std::vector<Stroke> prototype(const GlyphOptions& o, int cls) {
  Rng rng(derive_seed(o.seed, {stream_id("prototype"), static_cast<std::uint64_t>(cls)}));
  const int n = static_cast<int>(rng.uniform_int(2, 4));
  std::vector<Stroke> strokes;
  for (int s = 0; s < n; ++s) {
    const Point p0{rng.uniform(0.18, 0.82), rng.uniform(0.18, 0.82)};
    const double heading = rng.uniform(0.0, 2.0 * M_PI);
    const double length = rng.uniform(0.3, 0.65);
    Point p3{p0.x + length * std::cos(heading), p0.y + length * std::sin(heading)};
    p3.x = std::clamp(p3.x, 0.12, 0.88);
    p3.y = std::clamp(p3.y, 0.12, 0.88);
    const double nx = -(p3.y - p0.y);
    const double ny = p3.x - p0.x;
    const double b1 = rng.uniform(-0.6, 0.6);
    const double b2 = rng.uniform(-0.6, 0.6);
    const Point p1{p0.x + (p3.x - p0.x) / 3 + b1 * nx, p0.y + (p3.y - p0.y) / 3 + b1 * ny};
    const Point p2{p0.x + 2 * (p3.x - p0.x) / 3 + b2 * nx, p0.y + 2 * (p3.y - p0.y) / 3 + b2 * ny};
    strokes.push_back({p0, p1, p2, p3});
  }
  return strokes;
}

Point bezier(const Stroke& s, double t) {
  const double u = 1 - t;
  const double a = u * u * u, b = 3 * u * u * t, c = 3 * u * t * t, d = t * t * t;
  return {a * s[0].x + b * s[1].x + c * s[2].x + d * s[3].x, a * s[0].y + b * s[1].y + c * s[2].y + d * s[3].y};
}

double segment_distance(double px, double py, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Image render_glyph(const GlyphOptions& o, int cls, std::uint64_t split, std::uint64_t index) {
  Rng rng(derive_seed(o.seed, {stream_id("instance"), split, static_cast<std::uint64_t>(cls), index}));
  const double v = o.variability;
  std::vector<Stroke> strokes = prototype(o, cls);

  const double angle = 0.12 * v * rng.normal();
  const double scale = 1.0 + v * rng.uniform(-0.12, 0.08);
  const double shear = 0.10 * v * rng.normal();
  const double tx = 0.03 * v * rng.normal();
  const double ty = 0.03 * v * rng.normal();
  const double thickness = rng.uniform(1.3, 1.3 + 1.2 * std::max(v, 0.1));
  const double peak = rng.uniform(200.0, 255.0);
  const double ca = std::cos(angle), sa = std::sin(angle);

  const auto size = static_cast<double>(o.size);
  for (Stroke& s : strokes) {
    for (Point& p : s) {
      p.x += 0.035 * v * rng.normal();
      p.y += 0.035 * v * rng.normal();
      // affine about the canvas centre, then to pixel units
      const double x = p.x - 0.5 + shear * (p.y - 0.5);
      const double y = p.y - 0.5;
      p.x = (scale * (ca * x - sa * y) + 0.5 + tx) * size;
      p.y = (scale * (sa * x + ca * y) + 0.5 + ty) * size;
    }
  }

  std::vector<double> ink(static_cast<std::size_t>(o.size * o.size), 0.0);
  const double reach = thickness / 2 + 1.0;
  for (const Stroke& s : strokes) {
    // brush pressure fades linearly along the stroke
    const double ink0 = rng.uniform(kMinInk, 1.0);
    const double ink1 = rng.uniform(kMinInk, 1.0);
    Point prev = bezier(s, 0.0);
    for (int k = 1; k <= kCurveSegments; ++k) {
      const double t = static_cast<double>(k) / kCurveSegments;
      const double level = ink0 + (ink1 - ink0) * t;
      const Point cur = bezier(s, t);
      const int i0 = std::max(0, static_cast<int>(std::floor(std::min(prev.y, cur.y) - reach)));
      const int i1 = std::min(o.size - 1, static_cast<int>(std::ceil(std::max(prev.y, cur.y) + reach)));
      const int j0 = std::max(0, static_cast<int>(std::floor(std::min(prev.x, cur.x) - reach)));
      const int j1 = std::min(o.size - 1, static_cast<int>(std::ceil(std::max(prev.x, cur.x) + reach)));
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) {
          const double d = segment_distance(j + 0.5, i + 0.5, prev, cur);
          const double a = level * std::clamp(thickness / 2 + 0.5 - d, 0.0, 1.0);
          double& cell = ink[static_cast<std::size_t>(i * o.size + j)];
          cell = std::max(cell, a);
        }
      prev = cur;
    }
  }

  Image out(ImageShape{o.size, o.size, 1});
  auto px = out.data();
  for (std::size_t n = 0; n < ink.size(); ++n)
    px[n] = static_cast<std::uint8_t>(std::lround(std::clamp(ink[n] * peak, 0.0, 255.0)));
  return out;
}

DatasetSplits make_glyph_dataset(const GlyphOptions& o) {
  if (o.num_classes < 1 || o.size < 8) throw std::invalid_argument("glyph dataset needs >= 1 class and size >= 8");
  const ImageShape shape{o.size, o.size, 1};
  auto build = [&](const char* split, std::uint64_t code, int per_class) {
    LabeledImageDataset ds(shape, o.num_classes, DatasetMetadata{"glyph49", split, o.seed, {}});
    ds.reserve(static_cast<std::size_t>(per_class) * static_cast<std::size_t>(o.num_classes));
    for (int c = 0; c < o.num_classes; ++c)
      for (int k = 0; k < per_class; ++k) {
        const std::uint64_t id = (code << 40) | (static_cast<std::uint64_t>(c) << 24) | static_cast<std::uint64_t>(k);
        ds.add(render_glyph(o, c, code, static_cast<std::uint64_t>(k)), c, id);
      }
    return ds;
  };
  DatasetSplits splits{build("train", 1, o.train_per_class), build("test", 3, o.test_per_class), std::nullopt};
  if (o.val_per_class > 0) splits.val = build("val", 2, o.val_per_class);
  return splits;
}

}  // namespace invlab::data
