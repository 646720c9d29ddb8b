#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "invlab/core/rng.hpp"
#include "invlab/core/sampler.hpp"

using namespace invlab;

TEST(Mix64, MatchesReferenceSplitMix64FirstOutput) {
  // Reference SplitMix64 seeded with 0 yields 0xe220a8397b1dcdaf first.
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Rng, SameKeySameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.position(), 100u);
}

TEST(Rng, SplitDoesNotDependOnParentPosition) {
  Rng a(7);
  const Rng child_before = a.split("transform");
  for (int i = 0; i < 13; ++i) a.next_u64();
  Rng child_after = a.split("transform");
  Rng c = child_before;
  EXPECT_EQ(c.next_u64(), child_after.next_u64());
}

TEST(DeriveSeed, PathOrderMatters) {
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {1}));
  EXPECT_EQ(derive_seed(5, {}), 5u);
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(3);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Rng, BelowIsInRangeAndRoughlyUniform) {
  Rng r(11);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto v = r.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  // Chi-square with 6 degrees of freedom; 22.46 is the 0.999 quantile.
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi2, 22.46);
}

TEST(Rng, UniformIntCoversClosedRange) {
  Rng r(5);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(r.uniform_int(-2, 2));
  EXPECT_EQ(seen, (std::set<std::int64_t>{-2, -1, 0, 1, 2}));
}

TEST(Rng, NormalMoments) {
  Rng r(9);
  double s = 0.0, ss = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    ss += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(ss / n, 1.0, 0.03);
}

namespace {

// Adds the first byte drawn from the stream to every pixel.
class ShiftSampler final : public TransformSampler {
 public:
  Image sample(ImageView x, Rng& rng) const override {
    Image out(x);
    const auto shift = static_cast<std::uint8_t>(rng.below(256));
    for (auto& p : out.data()) p = static_cast<std::uint8_t>(p + shift);
    return out;
  }
  void check_shape(const ImageShape&) const override {}
  std::string name() const override { return "shift"; }
};

}  // namespace

TEST(TransformSampler, BatchUsesOneChildStreamPerInput) {
  const ShiftSampler s;
  Rng gen(1);
  std::vector<Image> images;
  for (int i = 0; i < 4; ++i) images.push_back(testutil::random_image({3, 3, 1}, gen));
  std::vector<ImageView> views(images.begin(), images.end());

  Rng rng(77);
  const auto batch = s.sample_batch(views, rng);

  Rng replay(77);
  const Rng base(replay.next_u64());
  for (std::size_t i = 0; i < views.size(); ++i) {
    Rng child = base.split(i);
    EXPECT_EQ(batch[i], s.sample(views[i], child)) << i;
  }
}
