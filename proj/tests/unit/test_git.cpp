#include <gtest/gtest.h>

#include "helpers.hpp"
#include "invlab/nuisance/transforms.hpp"
#include "invlab/train/git.hpp"

using namespace invlab;
using namespace invlab::train;

namespace {

Batch make_batch(std::size_t n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  Batch b;
  for (std::size_t i = 0; i < n; ++i) {
    b.images.push_back(testutil::random_image({6, 6, 1}, rng));
    b.labels.push_back(static_cast<int>(i % static_cast<std::size_t>(classes)));
    b.ids.push_back(100 + i);
  }
  return b;
}

// Inverts every pixel; never a fixed point on random images.
class Invert final : public TransformSampler {
 public:
  Image sample(ImageView x, Rng&) const override {
    Image out(x);
    for (auto& p : out.data()) p = static_cast<std::uint8_t>(255 - p);
    return out;
  }
  void check_shape(const ImageShape&) const override {}
  std::string name() const override { return "invert"; }
};

}  // namespace

TEST(Git, CandidateCount) {
  EXPECT_EQ(git_candidate_count(128, 0.5), 64u);
  EXPECT_EQ(git_candidate_count(128, 0.0), 0u);
  EXPECT_EQ(git_candidate_count(7, 1.0), 7u);
}

TEST(Git, ZeroProportionLeavesBatchUntouched) {
  Batch b = make_batch(16, 4, 1);
  const Batch before = b;
  const std::vector<std::int64_t> sizes{100, 50, 10, 5};
  Rng rng(2);
  GitConfig cfg{0.0, std::nullopt, GeneratorKind::oracle, nuisance::Family::rotation, ""};
  EXPECT_EQ(git_augment_batch(b, sizes, cfg, Invert{}, rng), 0u);
  EXPECT_EQ(b.images, before.images);
}

TEST(Git, IdentityGeneratorMarksEveryExampleButChangesNothing) {
  Batch b = make_batch(10, 2, 3);
  const Batch before = b;
  const std::vector<std::int64_t> sizes{3, 3};
  const auto gen = oracle_generator(nuisance::TransformDistribution::identity());
  Rng rng(4);
  GitConfig cfg{1.0, std::nullopt, GeneratorKind::oracle, nuisance::Family::identity, ""};
  EXPECT_EQ(git_augment_batch(b, sizes, cfg, *gen, rng), 10u);
  EXPECT_EQ(b.images, before.images);
  for (bool g : b.generated) EXPECT_TRUE(g);
}

TEST(Git, HalfBatchReplacesLeadingCandidatesOnly) {
  Batch b = make_batch(128, 8, 5);
  const Batch before = b;
  const std::vector<std::int64_t> sizes(8, 20);
  Rng rng(6);
  GitConfig cfg{0.5, std::nullopt, GeneratorKind::oracle, nuisance::Family::rotation, ""};
  EXPECT_EQ(git_augment_batch(b, sizes, cfg, Invert{}, rng), 64u);
  for (std::size_t i = 0; i < 128; ++i) {
    EXPECT_EQ(b.generated[i], i < 64) << i;
    EXPECT_EQ(b.images[i] != before.images[i], i < 64) << i;
  }
  EXPECT_EQ(b.labels, before.labels);
  EXPECT_EQ(b.ids, before.ids);
}

TEST(Git, CutoffRestrictsToSmallClasses) {
  Batch b = make_batch(40, 4, 7);
  const Batch before = b;
  const std::vector<std::int64_t> sizes{500, 26, 25, 3};
  Rng rng(8);
  GitConfig cfg{1.0, 25, GeneratorKind::oracle, nuisance::Family::rotation, ""};
  EXPECT_EQ(git_augment_batch(b, sizes, cfg, Invert{}, rng), 20u);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const bool small = sizes[static_cast<std::size_t>(b.labels[i])] <= 25;
    EXPECT_EQ(b.generated[i], small);
    EXPECT_EQ(b.images[i] != before.images[i], small);
  }
}

TEST(Git, DeterministicGivenStream) {
  const std::vector<std::int64_t> sizes{9, 9, 9};
  const auto gen = oracle_generator(nuisance::TransformDistribution::rotation());
  GitConfig cfg{0.5, std::nullopt, GeneratorKind::oracle, nuisance::Family::rotation, ""};
  Batch a = make_batch(12, 3, 9), b = make_batch(12, 3, 9);
  Rng ra(10), rb(10);
  git_augment_batch(a, sizes, cfg, *gen, ra);
  git_augment_batch(b, sizes, cfg, *gen, rb);
  EXPECT_EQ(a.images, b.images);
}

TEST(Git, ValidateRejectsBadSettings) {
  GitConfig cfg;
  cfg.p = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.p = 0.5;
  cfg.cutoff = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.cutoff.reset();
  cfg.generator = GeneratorKind::miitn;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.miitn_checkpoint = "m.pt";
  EXPECT_NO_THROW(cfg.validate());
}
