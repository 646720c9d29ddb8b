#include "invlab/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace invlab::data {

LabeledImageDataset::LabeledImageDataset(ImageShape shape, int num_classes, DatasetMetadata metadata)
    : shape_(shape),
      num_classes_(num_classes),
      class_sizes_(static_cast<std::size_t>(num_classes), 0),
      metadata_(std::move(metadata)) {
  if (num_classes < 1) throw std::invalid_argument("dataset needs at least one class");
  if (shape.pixels() == 0) throw std::invalid_argument("dataset image shape is empty");
}

void LabeledImageDataset::reserve(std::size_t n) {
  pixels_.reserve(n * shape_.pixels());
  labels_.reserve(n);
  ids_.reserve(n);
}

void LabeledImageDataset::append(ImageView image, int label, std::uint64_t id) {
  if (!(image.shape() == shape_))
    throw std::invalid_argument("image shape " + to_string(image.shape()) +
                                " does not match dataset shape " + to_string(shape_));
  if (label < 0 || label >= num_classes_)
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(num_classes_) + ")");
  pixels_.insert(pixels_.end(), image.data().begin(), image.data().end());
  labels_.push_back(label);
  ids_.push_back(id);
  ++class_sizes_[static_cast<std::size_t>(label)];
}

void LabeledImageDataset::add(ImageView image, int label, std::optional<std::uint64_t> id) {
  if (!transforms_.empty())
    throw std::logic_error("dataset carries transform parameters; add() needs them too");
  append(image, label, id.value_or(labels_.size()));
}

void LabeledImageDataset::add(ImageView image, int label, std::uint64_t id,
                              nuisance::TransformParams params) {
  if (transforms_.size() != labels_.size())
    throw std::logic_error("cannot mix examples with and without transform parameters");
  append(image, label, id);
  transforms_.push_back(std::move(params));
}

ImageView LabeledImageDataset::image(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("image index out of range");
  const std::size_t n = shape_.pixels();
  return ImageView(shape_, std::span<const std::uint8_t>(pixels_).subspan(i * n, n));
}

std::vector<std::vector<std::size_t>> LabeledImageDataset::indices_by_class() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_classes_));
  for (std::size_t i = 0; i < labels_.size(); ++i) out[static_cast<std::size_t>(labels_[i])].push_back(i);
  return out;
}

void LabeledImageDataset::validate() const {
  if (labels_.size() != ids_.size()) throw std::logic_error("labels/ids length mismatch");
  if (pixels_.size() != labels_.size() * shape_.pixels())
    throw std::logic_error("pixel buffer does not hold labels.size() images");
  if (!transforms_.empty() && transforms_.size() != labels_.size())
    throw std::logic_error("transform parameters not aligned with examples");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_) throw std::logic_error("label out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  if (counts != class_sizes_) throw std::logic_error("class_sizes out of sync with labels");
}

LabeledImageDataset LabeledImageDataset::subset(std::span<const std::size_t> indices) const {
  LabeledImageDataset out(shape_, num_classes_, metadata_);
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (has_transform_params())
      out.add(image(i), labels_.at(i), ids_[i], transforms_[i]);
    else
      out.add(image(i), labels_.at(i), ids_[i]);
  }
  return out;
}

bool LabeledImageDataset::operator==(const LabeledImageDataset& o) const {
  return shape_ == o.shape_ && num_classes_ == o.num_classes_ && pixels_ == o.pixels_ &&
         labels_ == o.labels_ && ids_ == o.ids_ && transforms_ == o.transforms_;
}

LabeledImageDataset apply_oneshot_transform(const LabeledImageDataset& base,
                                            const nuisance::TransformDistribution& t,
                                            std::uint64_t seed) {
  t.check_shape(base.shape());
  DatasetMetadata meta = base.metadata();
  meta.info["transform"] = {{"family", nuisance::to_string(t.family())}, {"seed", seed}};
  LabeledImageDataset out(base.shape(), base.num_classes(), std::move(meta));
  out.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    Rng rng(derive_seed(seed, {base.id(i)}));
    nuisance::Sample s = t.sample_with_params(base.image(i), rng);
    out.add(s.image, base.label(i), base.id(i), std::move(s.params));
  }
  return out;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng rng) {
  if (k > n) throw std::invalid_argument("cannot sample more items than available");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::pair<LabeledImageDataset, LabeledImageDataset> split_holdout(const LabeledImageDataset& ds,
                                                                  double fraction,
                                                                  std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) throw std::invalid_argument("holdout fraction must be in [0,1]");
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  const std::vector<std::size_t> held = sample_without_replacement(ds.size(), k, Rng(seed));
  std::vector<std::size_t> kept;
  kept.reserve(ds.size() - k);
  std::size_t h = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (h < held.size() && held[h] == i) {
      ++h;
      continue;
    }
    kept.push_back(i);
  }
  return {ds.subset(kept), ds.subset(held)};
}

}  // namespace invlab::data
