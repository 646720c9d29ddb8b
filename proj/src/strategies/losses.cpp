#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "invlab/strategies/strategies.hpp"

namespace invlab::strategies {

namespace {

double log_softmax_at(std::span<const double> z, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= z.size()) throw std::out_of_range("label out of range");
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return z[static_cast<std::size_t>(label)] - m - std::log(s);
}

}  // namespace

double cross_entropy(std::span<const double> logits, int label) { return -log_softmax_at(logits, label); }

double focal_loss(std::span<const double> logits, int label, double gamma) {
  const double logp = log_softmax_at(logits, label);
  if (gamma == 0.0) return -logp;
  return -std::pow(-std::expm1(logp), gamma) * logp;
}

std::vector<double> ldam_margins(std::span<const std::int64_t> class_sizes, double max_margin) {
  std::vector<double> m;
  m.reserve(class_sizes.size());
  for (std::int64_t n : class_sizes) {
    if (n < 1) throw std::invalid_argument("ldam_margins: every class needs at least one example");
    m.push_back(std::pow(static_cast<double>(n), -0.25));
  }
  const double top = *std::max_element(m.begin(), m.end());
  for (double& v : m) v *= max_margin / top;
  return m;
}

double ldam_loss(std::span<const double> logits, int label, std::span<const std::int64_t> class_sizes,
                 double max_margin, double scale) {
  if (logits.size() != class_sizes.size()) throw std::invalid_argument("ldam_loss: logits/class_sizes length mismatch");
  const std::vector<double> margins = ldam_margins(class_sizes, max_margin);
  std::vector<double> z(logits.begin(), logits.end());
  z.at(static_cast<std::size_t>(label)) -= margins[static_cast<std::size_t>(label)];
  for (double& v : z) v *= scale;
  return cross_entropy(z, label);
}

}  // namespace invlab::strategies
