#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invlab/data/dataset.hpp"
#include "invlab/nuisance/transforms.hpp"

namespace invlab::data {

/// Class-size decay law over rank r = 1..C.
struct DecayLaw {
  enum class Kind { zipf, exponential };

  Kind kind = Kind::zipf;
  double parameter = 2.0;  // Zipf exponent, or imbalance ratio for exponential

  static DecayLaw zipf(double exponent) { return {Kind::zipf, exponent}; }
  static DecayLaw exponential(double imbalance_ratio) { return {Kind::exponential, imbalance_ratio}; }

  /// "zipf:2.0" / "exp:100"
  static DecayLaw parse(const std::string& s);
  std::string to_string() const;

  bool operator==(const DecayLaw&) const = default;
};

struct LongTailPlan {
  std::vector<int> class_order;           // class_order[r] = class holding rank r+1
  std::vector<std::int64_t> target_sizes;  // per rank, non-increasing
  DecayLaw law;
  std::int64_t floor = 1;
  std::int64_t head_size = 0;

  std::int64_t total() const;
  /// Target for a class (not a rank).
  std::int64_t target_for_class(int cls) const;
  nlohmann::json to_json() const;
};

/// Targets per rank r (1-based), rounded half-to-even, floored:
///   zipf(s):        max(floor, round(head / r^s))
///   exponential(IR): max(floor, round(head * IR^(-(r-1)/(C-1))))
/// class_order is the identity; see with_ordering().
LongTailPlan make_longtail_plan(int num_classes, std::int64_t head_size, DecayLaw law, std::int64_t floor);

/// Seeded permutation of [0, C) (Fisher-Yates on the "order" stream).
std::vector<int> class_ordering(int num_classes, std::uint64_t ordering_seed);

/// Copy of `plan` whose class_order is class_ordering(C, ordering_seed).
LongTailPlan with_ordering(LongTailPlan plan, std::uint64_t ordering_seed);

struct DatasetVariant {
  std::string base;
  nuisance::Family transform_family = nuisance::Family::identity;
  LongTailPlan plan;
  std::uint64_t ordering_seed = 0;
};

/// Keeps, for the class at rank r, min(target_sizes[r], available) examples
/// chosen uniformly without replacement from the stream
/// derive_seed(ordering_seed, {"members", class}). Shortfalls are logged as
/// warnings and recorded in metadata.info["actual_sizes"/"shortfalls"].
/// Test splits are rejected: they are never pruned.
LabeledImageDataset build_longtail_dataset(const LabeledImageDataset& base, const LongTailPlan& plan,
                                           std::uint64_t ordering_seed);

/// Control dataset in which every class holds exactly `originals_per_class`
/// distinct base images, and the class at rank r holds target_sizes[r]
/// examples, each a fresh draw from T of an original (originals cycled in
/// order: example k uses original k mod originals_per_class).
/// metadata.info["origin_ids"] lists each example's source id.
LabeledImageDataset build_isotransform_dataset(const LabeledImageDataset& base, const LongTailPlan& plan,
                                               const nuisance::TransformDistribution& t,
                                               std::size_t originals_per_class, std::uint64_t seed);

}  // namespace invlab::data
