#include "invlab/train/git.hpp"

#include <cmath>
#include <stdexcept>

namespace invlab::train {

void GitConfig::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("GIT proportion p must lie in [0, 1]");
  if (cutoff && *cutoff < 0) throw std::invalid_argument("GIT cutoff K must be >= 0");
  if (generator == GeneratorKind::miitn && miitn_checkpoint.empty())
    throw std::invalid_argument("GIT with a learned generator needs a checkpoint path");
}

std::size_t git_candidate_count(std::size_t batch_size, double p) {
  return static_cast<std::size_t>(std::llround(p * static_cast<double>(batch_size)));
}

std::size_t git_augment_batch(Batch& batch, std::span<const std::int64_t> class_sizes, const GitConfig& config,
                              const TransformSampler& generator, Rng& rng) {
  if (batch.size() == 0) throw std::invalid_argument("git_augment_batch: empty batch");
  if (batch.images.size() != batch.size()) throw std::invalid_argument("git_augment_batch: images/labels mismatch");
  batch.generated.resize(batch.size(), false);
  const std::size_t candidates = std::min(batch.size(), git_candidate_count(batch.size(), config.p));

  std::vector<std::size_t> chosen;
  std::vector<ImageView> views;
  for (std::size_t i = 0; i < candidates; ++i) {
    const std::int64_t n = class_sizes[static_cast<std::size_t>(batch.labels[i])];
    if (config.cutoff && n > *config.cutoff) continue;
    chosen.push_back(i);
    views.push_back(batch.images[i]);
  }
  if (chosen.empty()) return 0;
  std::vector<Image> out = generator.sample_batch(views, rng);
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    batch.images[chosen[k]] = std::move(out[k]);
    batch.generated[chosen[k]] = true;
  }
  return chosen.size();
}

namespace {

class OracleGenerator final : public TransformSampler {
 public:
  explicit OracleGenerator(nuisance::TransformDistribution t) : t_(std::move(t)) {}
  Image sample(ImageView x, Rng& rng) const override { return t_.sample(x, rng); }
  void check_shape(const ImageShape& shape) const override { t_.check_shape(shape); }
  std::string name() const override { return t_.name(); }

 private:
  nuisance::TransformDistribution t_;
};

}  // namespace

std::shared_ptr<const TransformSampler> oracle_generator(const nuisance::TransformDistribution& t) {
  return std::make_shared<OracleGenerator>(t);
}

}  // namespace invlab::train
