#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invlab/metrics/metrics.hpp"

namespace invlab::exp {

/// One replicate's per-class values for one method.
struct ClassCurve {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> class_sizes;  // training size per class
  std::vector<std::optional<double>> values;
};

ClassCurve ekld_curve(std::string method, std::uint64_t seed, const metrics::EKLDReport& report,
                      std::vector<std::int64_t> class_sizes);
ClassCurve accuracy_curve(std::string method, std::uint64_t seed, std::vector<std::optional<double>> per_class,
                          std::vector<std::int64_t> class_sizes);

struct FigureFiles {
  std::filesystem::path csv, svg, png;
};

struct FigureStyle {
  std::string title;
  std::string y_label;
  /// Fixed y range; otherwise [0, 1.05 * largest upper bound].
  std::optional<double> y_max;
};

/// Plots, per method, the mean over replicates at each class-size rank
/// (largest class first) with a shaded 95% t-interval. Writes
/// `<stem>.csv` (one row per method, replicate and class), `<stem>.svg`
/// and `<stem>.png`.
FigureFiles emit_class_figure(std::span<const ClassCurve> curves, const std::filesystem::path& stem,
                              const FigureStyle& style);

/// Per-class eKLD against class size.
FigureFiles emit_ekld_figure(std::span<const ClassCurve> curves, const std::filesystem::path& stem);
/// Per-class test accuracy against class size.
FigureFiles emit_accuracy_by_class(std::span<const ClassCurve> curves, const std::filesystem::path& stem);

/// Aggregated curve of one method: value at each size rank.
struct RankSeries {
  std::string method;
  std::vector<double> mean_size;
  std::vector<double> mean;
  std::vector<double> lower, upper;  // equal to mean where the interval is undefined
};

std::vector<RankSeries> aggregate_by_rank(std::span<const ClassCurve> curves);

}  // namespace invlab::exp
