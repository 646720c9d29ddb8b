#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "invlab/strategies/strategies.hpp"

namespace invlab::strategies {

namespace {

std::vector<double> normalized(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= s;
  return v;
}

// Class masses when each example of class j is drawn with weight w_j.
std::vector<double> class_mass(std::span<const std::int64_t> sizes, auto&& per_example_weight) {
  std::vector<double> m;
  m.reserve(sizes.size());
  for (std::int64_t n : sizes) m.push_back(n > 0 ? static_cast<double>(n) * per_example_weight(n) : 0.0);
  return normalized(std::move(m));
}

EpochSampling uniform_examples(std::span<const std::int64_t> sizes, std::string phase) {
  return {class_mass(sizes, [](std::int64_t) { return 1.0; }), false, std::nullopt, std::move(phase)};
}

EpochSampling inverse_size(std::span<const std::int64_t> sizes, std::string phase) {
  return {class_mass(sizes, [](std::int64_t n) { return 1.0 / static_cast<double>(n); }), true, std::nullopt,
          std::move(phase)};
}

}  // namespace

EpochSampling make_sampler(const StrategyConfig& config, std::span<const std::int64_t> sizes, int epoch) {
  if (epoch < 0) throw std::invalid_argument("make_sampler: epoch must be >= 0");
  if (sizes.empty()) throw std::invalid_argument("make_sampler: no classes");
  switch (config.schedule) {
    case Schedule::erm:
      return uniform_examples(sizes, "erm");
    case Schedule::rs:
      return inverse_size(sizes, "resample");
    case Schedule::cb_rs:
      return {class_mass(sizes, [&](std::int64_t n) { return 1.0 / effective_number(n, config.beta); }), true,
              std::nullopt, "cb_resample"};
    case Schedule::drs:
      return epoch < config.switch_epoch ? uniform_examples(sizes, "erm") : inverse_size(sizes, "resample");
    case Schedule::drw: {
      EpochSampling s = uniform_examples(sizes, epoch < config.switch_epoch ? "erm" : "reweight");
      s.weights = epoch < config.switch_epoch ? ClassWeights::uniform(sizes.size()) : class_weights(sizes, config.beta);
      return s;
    }
    case Schedule::cb_rw: {
      EpochSampling s = uniform_examples(sizes, "reweight");
      s.weights = class_weights(sizes, config.beta);
      return s;
    }
  }
  throw std::logic_error("unhandled schedule");
}

std::vector<double> EpochSampling::example_probabilities(std::span<const int> labels,
                                                         std::span<const std::int64_t> class_sizes) const {
  std::vector<double> p(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto j = static_cast<std::size_t>(labels[i]);
    p[i] = class_probabilities.at(j) / static_cast<double>(class_sizes[j]);
  }
  return p;
}

std::vector<std::size_t> epoch_order(const EpochSampling& sampling, std::span<const int> labels, Rng& rng) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  if (!sampling.resample) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
  }
  std::vector<std::vector<std::size_t>> members(sampling.class_probabilities.size());
  for (std::size_t i = 0; i < n; ++i) members.at(static_cast<std::size_t>(labels[i])).push_back(i);
  std::vector<double> cdf(sampling.class_probabilities.size());
  std::partial_sum(sampling.class_probabilities.begin(), sampling.class_probabilities.end(), cdf.begin());
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform() * cdf.back();
    auto c = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    c = std::min(c, cdf.size() - 1);
    while (members[c].empty()) c = (c + 1) % members.size();  // zero-mass classes are never selected by u
    order[k] = members[c][rng.below(members[c].size())];
  }
  return order;
}

}  // namespace invlab::strategies
