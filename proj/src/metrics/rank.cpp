#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "invlab/metrics/metrics.hpp"

namespace invlab::metrics {

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  const std::vector<double> rx = midranks(x), ry = midranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double ekld_trend_statistic(const EKLDReport& report, std::span<const std::int64_t> class_sizes) {
  if (class_sizes.size() != report.per_class_ekld.size())
    throw std::invalid_argument("ekld_trend_statistic: class_sizes length differs from the report");
  std::vector<double> sizes, ekld;
  for (std::size_t j = 0; j < class_sizes.size(); ++j)
    if (report.per_class_ekld[j]) {
      sizes.push_back(static_cast<double>(class_sizes[j]));
      ekld.push_back(*report.per_class_ekld[j]);
    }
  if (sizes.size() < 3) throw std::invalid_argument("ekld_trend_statistic: needs at least 3 classes with data");
  if (std::all_of(sizes.begin(), sizes.end(), [&](double s) { return s == sizes.front(); }))
    throw std::domain_error("ekld_trend_statistic: undefined when all class sizes tie");
  return spearman(sizes, ekld);
}

}  // namespace invlab::metrics
