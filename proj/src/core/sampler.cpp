#include "invlab/core/sampler.hpp"

#include <stdexcept>

namespace invlab {

std::vector<Image> TransformSampler::sample_batch(std::span<const ImageView> xs, Rng& rng) const {
  const Rng base(rng.next_u64());
  std::vector<Rng> rngs;
  rngs.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) rngs.push_back(base.split(i));
  return sample_each(xs, rngs);
}

std::vector<Image> TransformSampler::sample_each(std::span<const ImageView> xs, std::span<Rng> rngs) const {
  if (xs.size() != rngs.size()) throw std::invalid_argument("sample_each: one stream per input required");
  std::vector<Image> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back(sample(xs[i], rngs[i]));
  return out;
}

}  // namespace invlab
