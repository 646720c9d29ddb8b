#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "invlab/core/image.hpp"
#include "invlab/nuisance/transforms.hpp"

namespace invlab::data {

struct DatasetMetadata {
  std::string name;
  std::string split;  // "train" | "val" | "test"
  std::uint64_t seed = 0;
  nlohmann::json info = nlohmann::json::object();
};

/// Images with integer labels in [0, C), stored contiguously (HWC, 8-bit).
///
/// Each example carries a 64-bit id that is stable across pruning; seeded
/// per-example operations key their random streams on it, so they commute
/// with subsetting. Per-example transform parameters are kept when the
/// dataset was produced by a one-shot transform.
class LabeledImageDataset {
 public:
  LabeledImageDataset() = default;
  LabeledImageDataset(ImageShape shape, int num_classes, DatasetMetadata metadata = {});

  void reserve(std::size_t n);
  /// Appends an example. The id defaults to the current size.
  void add(ImageView image, int label, std::optional<std::uint64_t> id = std::nullopt);
  void add(ImageView image, int label, std::uint64_t id, nuisance::TransformParams params);

  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  const ImageShape& shape() const { return shape_; }
  int num_classes() const { return num_classes_; }

  ImageView image(std::size_t i) const;
  int label(std::size_t i) const { return labels_.at(i); }
  std::uint64_t id(std::size_t i) const { return ids_.at(i); }
  std::span<const int> labels() const { return labels_; }
  std::span<const std::uint64_t> ids() const { return ids_; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  bool has_transform_params() const { return !transforms_.empty(); }
  const nuisance::TransformParams& transform_params(std::size_t i) const { return transforms_.at(i); }

  const std::vector<std::int64_t>& class_sizes() const { return class_sizes_; }
  std::vector<std::vector<std::size_t>> indices_by_class() const;

  DatasetMetadata& metadata() { return metadata_; }
  const DatasetMetadata& metadata() const { return metadata_; }

  /// Throws std::logic_error if any structural invariant is broken.
  void validate() const;

  /// Examples at `indices`, in that order. Metadata is copied.
  LabeledImageDataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const LabeledImageDataset& other) const;

 private:
  void append(ImageView image, int label, std::uint64_t id);

  ImageShape shape_;
  int num_classes_ = 0;
  std::vector<std::uint8_t> pixels_;
  std::vector<int> labels_;
  std::vector<std::uint64_t> ids_;
  std::vector<nuisance::TransformParams> transforms_;
  std::vector<std::int64_t> class_sizes_;
  DatasetMetadata metadata_;
};

struct DatasetSplits {
  LabeledImageDataset train;
  LabeledImageDataset test;
  std::optional<LabeledImageDataset> val;
};

/// Seeded one-shot transform: each image is replaced by exactly one draw
/// x' ~ T(.|x), using the stream derive_seed(seed, {id}). Labels and ids are
/// unchanged and the drawn parameters are kept per example.
LabeledImageDataset apply_oneshot_transform(const LabeledImageDataset& base,
                                            const nuisance::TransformDistribution& t,
                                            std::uint64_t seed);

/// Seeded holdout: round(fraction * N) examples drawn uniformly without
/// replacement go to `.second`, the rest (original order) to `.first`.
std::pair<LabeledImageDataset, LabeledImageDataset> split_holdout(const LabeledImageDataset& ds,
                                                                  double fraction,
                                                                  std::uint64_t seed);

/// Seeded sample of k distinct indices from [0, n), returned sorted.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng rng);

}  // namespace invlab::data
