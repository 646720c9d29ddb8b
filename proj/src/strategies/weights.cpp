#include <cmath>
#include <numeric>
#include <stdexcept>

#include "invlab/strategies/strategies.hpp"

namespace invlab::strategies {

double effective_number(std::int64_t n, double beta) {
  if (n < 0) throw std::invalid_argument("effective_number: n must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("effective_number: beta must lie in [0, 1)");
  if (n == 0) return 0.0;
  // expm1 keeps precision when beta^n is close to 1
  return -std::expm1(static_cast<double>(n) * std::log(beta)) / (1.0 - beta);
}

ClassWeights ClassWeights::uniform(std::size_t num_classes) { return {std::vector<double>(num_classes, 1.0)}; }

ClassWeights class_weights(std::span<const std::int64_t> class_sizes, double beta) {
  if (class_sizes.empty()) throw std::invalid_argument("class_weights: no classes");
  ClassWeights w;
  w.weights.reserve(class_sizes.size());
  for (std::int64_t n : class_sizes) {
    if (n < 1) throw std::invalid_argument("class_weights: every class needs at least one example");
    w.weights.push_back(1.0 / effective_number(n, beta));
  }
  const double mean = std::accumulate(w.weights.begin(), w.weights.end(), 0.0) / static_cast<double>(w.size());
  for (double& x : w.weights) x /= mean;
  return w;
}

}  // namespace invlab::strategies
