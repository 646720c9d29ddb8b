#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invlab/core/sampler.hpp"
#include "invlab/nuisance/transforms.hpp"

namespace invlab::train {

enum class GeneratorKind { none, oracle, miitn };

struct GitConfig {
  double p = 0.5;
  /// Classes with at most this many training examples are augmented;
  /// nullopt means no cutoff (every class).
  std::optional<std::int64_t> cutoff;
  GeneratorKind generator = GeneratorKind::none;
  nuisance::Family oracle_family = nuisance::Family::identity;
  std::string miitn_checkpoint;

  bool enabled() const { return generator != GeneratorKind::none; }
  void validate() const;
  bool operator==(const GitConfig&) const = default;
};

/// A training minibatch in sampler order.
struct Batch {
  std::vector<Image> images;
  std::vector<int> labels;
  std::vector<std::uint64_t> ids;
  /// Set for examples that went through the generator.
  std::vector<bool> generated;

  std::size_t size() const { return labels.size(); }
};

/// Round(p * batch_size): the number of leading positions that are GIT candidates.
std::size_t git_candidate_count(std::size_t batch_size, double p);

/// Replaces each candidate whose class size is within the cutoff by one
/// generator draw. Labels, ids and order never change. Returns the number of
/// replaced examples.
std::size_t git_augment_batch(Batch& batch, std::span<const std::int64_t> class_sizes, const GitConfig& config,
                              const TransformSampler& generator, Rng& rng);

/// The ground-truth family used as the generator.
std::shared_ptr<const TransformSampler> oracle_generator(const nuisance::TransformDistribution& t);

}  // namespace invlab::train
