#include "invlab/exp/figures.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "invlab/data/io.hpp"
#include "invlab/exp/results.hpp"

namespace fs = std::filesystem;

namespace invlab::exp {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 420;
constexpr int kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;

struct Rgb {
  std::uint8_t r, g, b;
};

constexpr std::array<Rgb, 8> kPalette{{{31, 119, 180},
                                       {214, 39, 40},
                                       {44, 160, 44},
                                       {255, 127, 14},
                                       {148, 103, 189},
                                       {140, 86, 75},
                                       {227, 119, 194},
                                       {127, 127, 127}}};

std::string hex(Rgb c) {
  std::array<char, 8> buf{};
  std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", c.r, c.g, c.b);
  return buf.data();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  std::array<char, 40> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

// Class indices ordered by descending training size (ties by index).
std::vector<int> rank_order(std::span<const std::int64_t> sizes) {
  std::vector<int> idx(sizes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return sizes[a] > sizes[b]; });
  return idx;
}

struct Frame {
  std::size_t ranks = 1;
  double y_max = 1.0;
  double x(double rank) const {
    const double span = ranks > 1 ? static_cast<double>(ranks - 1) : 1.0;
    return kLeft + rank / span * (kWidth - kLeft - kRight);
  }
  double y(double v) const { return kTop + (1.0 - v / y_max) * (kHeight - kTop - kBottom); }
};

std::vector<std::size_t> tick_ranks(std::size_t ranks) {
  std::vector<std::size_t> out;
  const std::size_t step = std::max<std::size_t>(1, (ranks + 7) / 8);
  for (std::size_t r = 0; r < ranks; r += step) out.push_back(r);
  if (out.back() != ranks - 1) out.push_back(ranks - 1);
  return out;
}

std::string number(double v, int precision) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

void write_svg(const fs::path& path, const std::vector<RankSeries>& series, const Frame& f, const FigureStyle& style) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(style.title)
      << "</text>\n";

  // Axes, ticks and labels.
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  out << "<path d=\"M" << x0 << ' ' << y1 << " V" << y0 << " H" << x1 << "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = f.y_max * i / 5.0;
    out << "<line x1=\"" << x0 - 4 << "\" x2=\"" << x0 << "\" y1=\"" << f.y(v) << "\" y2=\"" << f.y(v)
        << "\" stroke=\"black\"/><text x=\"" << x0 - 7 << "\" y=\"" << f.y(v) + 4 << "\" text-anchor=\"end\">"
        << number(v, 3) << "</text>\n";
  }
  if (!series.empty()) {
    for (std::size_t r : tick_ranks(f.ranks)) {
      const double size = series.front().mean_size[r];
      out << "<line x1=\"" << f.x(r) << "\" x2=\"" << f.x(r) << "\" y1=\"" << y0 << "\" y2=\"" << y0 + 4
          << "\" stroke=\"black\"/><text x=\"" << f.x(r) << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">"
          << number(size, 4) << "</text>\n";
    }
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 15
      << "\" text-anchor=\"middle\">training class size (largest to smallest)</text>\n"
      << "<text transform=\"translate(18," << (y0 + y1) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(style.y_label) << "</text>\n";

  for (std::size_t m = 0; m < series.size(); ++m) {
    const auto& s = series[m];
    const std::string color = hex(kPalette[m % kPalette.size()]);
    std::ostringstream band, line;
    for (std::size_t r = 0; r < s.mean.size(); ++r) band << (r ? " L" : "M") << f.x(r) << ' ' << f.y(s.upper[r]);
    for (std::size_t r = s.mean.size(); r-- > 0;) band << " L" << f.x(r) << ' ' << f.y(s.lower[r]);
    for (std::size_t r = 0; r < s.mean.size(); ++r) line << (r ? " L" : "M") << f.x(r) << ' ' << f.y(s.mean[r]);
    out << "<path d=\"" << band.str() << " Z\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n"
        << "<path d=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(m);
    out << "<line x1=\"" << x1 - 170 << "\" x2=\"" << x1 - 145 << "\" y1=\"" << ly << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << x1 - 140 << "\" y=\"" << ly + 4 << "\">"
        << escape(s.method) << "</text>\n";
  }
  out << "</svg>\n";
}

class Canvas {
 public:
  Canvas() : image_(ImageShape{kHeight, kWidth, 3}, 255) {}

  void blend(int x, int y, Rgb c, double alpha) {
    if (x < 0 || y < 0 || x >= kWidth || y >= kHeight) return;
    const std::array<std::uint8_t, 3> rgb{c.r, c.g, c.b};
    for (int ch = 0; ch < 3; ++ch) {
      auto& p = image_.at(y, x, ch);
      p = static_cast<std::uint8_t>(std::lround(p * (1.0 - alpha) + rgb[ch] * alpha));
    }
  }

  void line(double xa, double ya, double xb, double yb, Rgb c, int thickness) {
    const double len = std::hypot(xb - xa, yb - ya);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 2)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(xa + t * (xb - xa)));
      const int y = static_cast<int>(std::lround(ya + t * (yb - ya)));
      for (int dy = 0; dy < thickness; ++dy)
        for (int dx = 0; dx < thickness; ++dx) blend(x + dx - thickness / 2, y + dy - thickness / 2, c, 1.0);
    }
  }

  // Vertical spans between two piecewise-linear curves, one pass per pixel column.
  void band(const std::vector<double>& xs, const std::vector<double>& lo, const std::vector<double>& hi, Rgb c) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const int xa = static_cast<int>(std::ceil(xs[i]));
      const int xb = static_cast<int>(std::floor(xs[i + 1]));
      for (int x = xa; x <= xb; ++x) {
        const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        const double top = hi[i] + t * (hi[i + 1] - hi[i]);
        const double bottom = lo[i] + t * (lo[i + 1] - lo[i]);
        for (int y = static_cast<int>(std::ceil(top)); y <= static_cast<int>(std::floor(bottom)); ++y)
          blend(x, y, c, 0.2);
      }
    }
  }

  const Image& image() const { return image_; }

 private:
  Image image_;
};

void write_png(const fs::path& path, const std::vector<RankSeries>& series, const Frame& f) {
  Canvas canvas;
  const Rgb black{0, 0, 0};
  for (std::size_t m = 0; m < series.size(); ++m) {
    const auto& s = series[m];
    const Rgb color = kPalette[m % kPalette.size()];
    std::vector<double> xs, lo, hi;
    for (std::size_t r = 0; r < s.mean.size(); ++r) {
      xs.push_back(f.x(r));
      lo.push_back(f.y(s.lower[r]));
      hi.push_back(f.y(s.upper[r]));
    }
    canvas.band(xs, lo, hi, color);
    for (std::size_t r = 0; r + 1 < s.mean.size(); ++r)
      canvas.line(f.x(r), f.y(s.mean[r]), f.x(r + 1), f.y(s.mean[r + 1]), color, 2);
    const double ly = kTop + 10 + 18.0 * static_cast<double>(m);
    canvas.line(kWidth - kRight - 170, ly, kWidth - kRight - 145, ly, color, 2);
  }
  canvas.line(kLeft, kTop, kLeft, kHeight - kBottom, black, 1);
  canvas.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, black, 1);
  for (int i = 0; i <= 5; ++i) canvas.line(kLeft - 4, f.y(f.y_max * i / 5.0), kLeft, f.y(f.y_max * i / 5.0), black, 1);
  for (std::size_t r : tick_ranks(f.ranks)) canvas.line(f.x(r), kHeight - kBottom, f.x(r), kHeight - kBottom + 4, black, 1);
  data::write_png(path, canvas.image());
}

}  // namespace

ClassCurve ekld_curve(std::string method, std::uint64_t seed, const metrics::EKLDReport& report,
                      std::vector<std::int64_t> class_sizes) {
  return {std::move(method), seed, std::move(class_sizes), report.per_class_ekld};
}

ClassCurve accuracy_curve(std::string method, std::uint64_t seed, std::vector<std::optional<double>> per_class,
                          std::vector<std::int64_t> class_sizes) {
  return {std::move(method), seed, std::move(class_sizes), std::move(per_class)};
}

std::vector<RankSeries> aggregate_by_rank(std::span<const ClassCurve> curves) {
  std::vector<std::string> methods;
  for (const auto& c : curves)
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);

  std::vector<RankSeries> out;
  for (const auto& m : methods) {
    std::vector<std::vector<double>> by_rank, sizes;
    for (const auto& c : curves) {
      if (c.method != m) continue;
      if (c.values.size() != c.class_sizes.size()) throw std::invalid_argument("curve values and class sizes differ in length");
      if (by_rank.empty()) {
        by_rank.resize(c.values.size());
        sizes.resize(c.values.size());
      }
      if (by_rank.size() != c.values.size()) throw std::invalid_argument("curves of one method differ in class count");
      const auto order = rank_order(c.class_sizes);
      for (std::size_t r = 0; r < order.size(); ++r) {
        sizes[r].push_back(static_cast<double>(c.class_sizes[order[r]]));
        if (const auto& v = c.values[order[r]]) by_rank[r].push_back(*v);
      }
    }
    RankSeries s;
    s.method = m;
    for (std::size_t r = 0; r < by_rank.size(); ++r) {
      s.mean_size.push_back(std::accumulate(sizes[r].begin(), sizes[r].end(), 0.0) / static_cast<double>(sizes[r].size()));
      const auto ci = t_interval(by_rank[r]);
      const double mean = ci.n ? ci.mean : 0.0;
      const double half = std::isnan(ci.half_width) ? 0.0 : ci.half_width;
      s.mean.push_back(mean);
      s.lower.push_back(mean - half);
      s.upper.push_back(mean + half);
    }
    out.push_back(std::move(s));
  }
  return out;
}

FigureFiles emit_class_figure(std::span<const ClassCurve> curves, const fs::path& stem, const FigureStyle& style) {
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  FigureFiles files{stem.string() + ".csv", stem.string() + ".svg", stem.string() + ".png"};

  {
    std::ofstream csv(files.csv);
    if (!csv) throw std::runtime_error("cannot write " + files.csv.string());
    csv << "method,seed,rank,class_index,class_size,value\n";
    for (const auto& c : curves) {
      const auto order = rank_order(c.class_sizes);
      for (std::size_t r = 0; r < order.size(); ++r) {
        csv << c.method << ',' << c.seed << ',' << r + 1 << ',' << order[r] << ',' << c.class_sizes[order[r]] << ',';
        if (const auto& v = c.values.at(order[r])) csv << shortest(*v);
        csv << '\n';
      }
    }
  }

  const auto series = aggregate_by_rank(curves);
  Frame f;
  for (const auto& s : series) f.ranks = std::max(f.ranks, s.mean.size());
  if (style.y_max) {
    f.y_max = *style.y_max;
  } else {
    double top = 0.0;
    for (const auto& s : series)
      for (double u : s.upper) top = std::max(top, u);
    f.y_max = top > 0.0 ? top * 1.05 : 1.0;
  }
  write_svg(files.svg, series, f, style);
  write_png(files.png, series, f);
  return files;
}

FigureFiles emit_ekld_figure(std::span<const ClassCurve> curves, const fs::path& stem) {
  return emit_class_figure(curves, stem, {"Invariance by class size", "eKLD (nats)", std::nullopt});
}

FigureFiles emit_accuracy_by_class(std::span<const ClassCurve> curves, const fs::path& stem) {
  return emit_class_figure(curves, stem, {"Test accuracy by class size", "accuracy", 1.0});
}

}  // namespace invlab::exp
