#pragma once

#include <span>
#include <string>
#include <vector>

#include "invlab/core/image.hpp"
#include "invlab/core/rng.hpp"

namespace invlab {

/// Anything that can draw x' ~ T(.|x): a parametric nuisance family, or a
/// learned generator standing in for one.
class TransformSampler {
 public:
  virtual ~TransformSampler() = default;

  virtual Image sample(ImageView x, Rng& rng) const = 0;

  /// One draw per input. Implementations may batch; the default takes one
  /// key from `rng` and gives input i the child stream split(i) of it.
  virtual std::vector<Image> sample_batch(std::span<const ImageView> xs, Rng& rng) const;
  /// One draw per input, input i consuming only rngs[i]. Equivalent to
  /// calling sample(xs[i], rngs[i]) in turn, though batched implementations
  /// may differ from it in floating-point rounding.
  virtual std::vector<Image> sample_each(std::span<const ImageView> xs, std::span<Rng> rngs) const;

  /// Throws std::invalid_argument when inputs of this shape are unsupported.
  virtual void check_shape(const ImageShape& shape) const = 0;

  virtual std::string name() const = 0;
};

}  // namespace invlab
