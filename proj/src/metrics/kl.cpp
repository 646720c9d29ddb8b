#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "invlab/metrics/metrics.hpp"

namespace invlab::metrics {

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw std::invalid_argument("ProbVector: empty");
  for (double v : p_)
    if (!(v >= 0.0)) throw std::invalid_argument("ProbVector: entries must be non-negative numbers");
  const double s = std::accumulate(p_.begin(), p_.end(), 0.0);
  if (std::abs(s - 1.0) > 1e-6) throw std::invalid_argument("ProbVector: entries must sum to 1");
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double floor) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: length mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i]) || std::isnan(q[i])) throw std::invalid_argument("kl_divergence: NaN input");
    if (p[i] <= 0.0) continue;
    const double pi = std::max(p[i], floor);
    d += pi * (std::log(pi) - std::log(std::max(q[i], floor)));
  }
  // rounding can leave tiny negatives for p == q
  return std::max(d, 0.0);
}

std::vector<int> predict_labels(const ProbabilisticClassifier& classifier, const data::LabeledImageDataset& dataset,
                                std::size_t batch_size) {
  const auto c = static_cast<std::size_t>(classifier.num_classes());
  std::vector<int> out;
  out.reserve(dataset.size());
  std::vector<ImageView> views;
  for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
    const std::size_t end = std::min(dataset.size(), start + batch_size);
    views.clear();
    for (std::size_t i = start; i < end; ++i) views.push_back(dataset.image(i));
    const std::vector<double> p = classifier.predict_proba(views);
    for (std::size_t r = 0; r < views.size(); ++r) {
      const auto row = p.begin() + static_cast<std::ptrdiff_t>(r * c);
      out.push_back(static_cast<int>(std::max_element(row, row + static_cast<std::ptrdiff_t>(c)) - row));
    }
  }
  return out;
}

}  // namespace invlab::metrics
