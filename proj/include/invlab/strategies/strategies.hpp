#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invlab/core/rng.hpp"

namespace invlab::strategies {

// Class weighting --------------------------------------------------------------

/// (1 - beta^n) / (1 - beta); beta must lie in [0, 1).
double effective_number(std::int64_t n, double beta);

/// Per-class positive weights with mean 1.
struct ClassWeights {
  std::vector<double> weights;

  static ClassWeights uniform(std::size_t num_classes);
  double operator[](std::size_t j) const { return weights[j]; }
  std::size_t size() const { return weights.size(); }
};

/// Weights proportional to 1 / effective_number(n_j, beta), rescaled to mean 1.
ClassWeights class_weights(std::span<const std::int64_t> class_sizes, double beta);

// Losses (reference scalar versions; the training path uses the tensor ones) ---

double cross_entropy(std::span<const double> logits, int label);
/// -(1 - p)^gamma * log p, p the softmax probability of `label`.
double focal_loss(std::span<const double> logits, int label, double gamma);
/// Margins proportional to n^(-1/4), scaled so the largest equals max_margin.
std::vector<double> ldam_margins(std::span<const std::int64_t> class_sizes, double max_margin);
/// Cross-entropy over scale * (z - margin[label] * onehot(label)).
double ldam_loss(std::span<const double> logits, int label, std::span<const std::int64_t> class_sizes,
                 double max_margin, double scale);

// Strategy configuration -------------------------------------------------------

enum class LossKind { ce, focal, ldam };
enum class Schedule { erm, rs, cb_rs, drs, drw, cb_rw };

std::string to_string(LossKind k);
std::string to_string(Schedule s);
LossKind parse_loss(const std::string& s);
Schedule parse_schedule(const std::string& s);

struct StrategyConfig {
  LossKind loss = LossKind::ce;
  double gamma = 1.0;
  double max_margin = 0.5;
  double scale = 30.0;
  Schedule schedule = Schedule::erm;
  double beta = 0.9999;
  int switch_epoch = 30;  // DRS / DRW only

  /// Throws std::invalid_argument on out-of-range values.
  void validate(int total_epochs) const;

  /// Flat keys: loss, gamma, max_margin, scale, schedule, beta, switch_epoch.
  std::map<std::string, std::string> to_kv() const;
  /// Missing keys keep their defaults; unknown keys are ignored.
  static StrategyConfig from_kv(const std::map<std::string, std::string>& kv);

  /// Short label such as "CE+DRS" or "LDAM+DRW".
  std::string label() const;

  bool operator==(const StrategyConfig&) const = default;
};

// Sampling -----------------------------------------------------------------------

/// Sampling behaviour for one epoch.
struct EpochSampling {
  /// Probability mass assigned to each class; examples within a class are
  /// equally likely. Sums to 1.
  std::vector<double> class_probabilities;
  /// True: draw N examples with replacement. False: one pass over a random
  /// permutation (the class masses are then proportional to class sizes).
  bool resample = false;
  /// Loss weights for reweighting schedules.
  std::optional<ClassWeights> weights;
  std::string phase;

  /// Probability of each example given its label.
  std::vector<double> example_probabilities(std::span<const int> labels,
                                            std::span<const std::int64_t> class_sizes) const;
};

EpochSampling make_sampler(const StrategyConfig& config, std::span<const std::int64_t> class_sizes, int epoch);

/// Example order for one epoch of `labels` (size N): a permutation, or N
/// independent draws when `sampling.resample` is set.
std::vector<std::size_t> epoch_order(const EpochSampling& sampling, std::span<const int> labels, Rng& rng);

}  // namespace invlab::strategies
