#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "invlab/nuisance/transforms.hpp"

using namespace invlab;
using namespace invlab::nuisance;
using invlab::testutil::random_image;

namespace {

// Window max/min by direct enumeration: offsets [-a, k-1-a] with a = (k-1)/2,
// out-of-image samples read as `pad`.
Image brute_morph(ImageView x, int k, bool dilate_op) {
  const int a = (k - 1) / 2;
  Image out(x.shape());
  for (int i = 0; i < x.height(); ++i)
    for (int j = 0; j < x.width(); ++j)
      for (int c = 0; c < x.channels(); ++c) {
        int best = dilate_op ? 0 : 255;
        for (int di = -a; di <= k - 1 - a; ++di)
          for (int dj = -a; dj <= k - 1 - a; ++dj) {
            const int r = i + di, s = j + dj;
            const int v = (r < 0 || s < 0 || r >= x.height() || s >= x.width()) ? (dilate_op ? 0 : 255) : x.at(r, s, c);
            best = dilate_op ? std::max(best, v) : std::min(best, v);
          }
        out.at(i, j, c) = static_cast<std::uint8_t>(best);
      }
  return out;
}

}  // namespace

TEST(Rotation, ZeroAngleIsIdentity) {
  Rng rng(1);
  const Image x = random_image({9, 7, 1}, rng);
  EXPECT_EQ(rotate(x, 0.0), x);
}

TEST(Rotation, HalfTurnReversesBothAxes) {
  Rng rng(2);
  const Image x = random_image({8, 6, 1}, rng);
  const auto out = rotate_exact(x, std::numbers::pi);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 6; ++j) EXPECT_NEAR(out[i * 6 + j], x.at(7 - i, 5 - j), 1e-6);
}

TEST(Rotation, QuarterTurnMatchesIndexPermutation) {
  Rng rng(3);
  for (int side : {5, 8, 28}) {
    const Image x = random_image({side, side, 1}, rng);
    const auto out = rotate_exact(x, std::numbers::pi / 2);
    // Transpose, then flip vertically.
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) ASSERT_NEAR(out[i * side + j], x.at(j, side - 1 - i), 1e-6) << side;
  }
}

TEST(Background, Examples) {
  Rng rng(4);
  const Image x = random_image({5, 5, 1}, rng);
  EXPECT_EQ(raise_background(x, 0), x);

  const Image black({3, 4, 1}, 0);
  const Image lifted = raise_background(black, 80);
  EXPECT_TRUE(std::all_of(lifted.data().begin(), lifted.data().end(), [](auto p) { return p == 80; }));

  const Image three({1, 3, 1}, std::vector<std::uint8_t>{0, 50, 150});
  EXPECT_EQ(raise_background(three, 80), Image({1, 3, 1}, std::vector<std::uint8_t>{80, 80, 150}));
}

TEST(Background, RejectsColourImages) {
  const Image rgb({2, 2, 3}, 0);
  EXPECT_THROW(raise_background(rgb, 10), std::invalid_argument);
  EXPECT_THROW(TransformDistribution::background().check_shape(rgb.shape()), std::invalid_argument);
}

TEST(Morphology, UnitErosionIsIdentity) {
  Rng rng(5);
  const Image x = random_image({6, 6, 1}, rng);
  EXPECT_EQ(erode(x, 1), x);
}

TEST(Morphology, SingleWhitePixelDilatedByTwo) {
  Image x({7, 7, 1}, 0);
  x.at(3, 4) = 255;
  const Image out = dilate(x, 2);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      const bool in_block = (i == 2 || i == 3) && (j == 3 || j == 4);
      EXPECT_EQ(out.at(i, j), in_block ? 255 : 0) << i << ',' << j;
    }
}

TEST(Morphology, ConstantImageUnchanged) {
  const Image x({6, 5, 1}, 123);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_EQ(dilate(x, k), x);
    EXPECT_EQ(erode(x, k), x);
  }
}

TEST(Morphology, MatchesBruteForceWindow) {
  Rng rng(6);
  for (int k = 1; k <= 4; ++k) {
    const Image x = random_image({9, 11, 1}, rng);
    EXPECT_EQ(dilate(x, k), brute_morph(x, k, true)) << k;
    EXPECT_EQ(erode(x, k), brute_morph(x, k, false)) << k;
  }
}

TEST(Morphology, DilationExtensiveErosionAntiExtensive) {
  Rng rng(7);
  for (int n = 0; n < 1000; ++n) {
    const Image x = random_image({12, 12, 1}, rng);
    const int k = 1 + static_cast<int>(rng.below(4));
    const Image d = dilate(x, k), e = erode(x, k);
    for (std::size_t i = 0; i < x.data().size(); ++i) {
      ASSERT_GE(d.data()[i], x.data()[i]);
      ASSERT_LE(e.data()[i], x.data()[i]);
    }
  }
}

TEST(DilationErosionFamily, DilationFrequency) {
  const auto t = TransformDistribution::dilation_erosion();
  Rng rng(8);
  int dilations = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto p = std::get<MorphologyParams>(t.draw(rng));
    if (p.op == MorphOp::dilate) {
      ++dilations;
      EXPECT_TRUE(p.kernel >= 2 && p.kernel <= 4);
    } else {
      EXPECT_TRUE(p.kernel == 1 || p.kernel == 2);
    }
  }
  EXPECT_NEAR(static_cast<double>(dilations) / n, 0.6, 0.015);
}

TEST(Families, DrawRanges) {
  Rng rng(9);
  const auto rot = TransformDistribution::rotation();
  const auto bg = TransformDistribution::background();
  int lo = 1000, hi = -1;
  for (int i = 0; i < 5000; ++i) {
    const double a = std::get<RotationParams>(rot.draw(rng)).angle;
    ASSERT_GE(a, 0.0);
    ASSERT_LT(a, 2 * std::numbers::pi);
    const int b = std::get<BackgroundParams>(bg.draw(rng)).level;
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  EXPECT_EQ(lo, 0);
  EXPECT_EQ(hi, 100);
}

TEST(Families, DrawnParametersDetermineOutput) {
  Rng gen(10);
  const Image x = random_image({10, 10, 1}, gen);
  for (Family f : {Family::identity, Family::rotation, Family::background, Family::dilation_erosion}) {
    const auto t = TransformDistribution::of(f);
    Rng a(55), b(55);
    const Sample s = t.sample_with_params(x, a);
    EXPECT_EQ(s.image, t.sample(x, b)) << to_string(f);
    EXPECT_EQ(s.image, nuisance::apply(x, s.params)) << to_string(f);
    EXPECT_EQ(s.image.shape(), x.shape());
    EXPECT_EQ(family_of(s.params), f);
  }
}

TEST(Families, IdentityReturnsInput) {
  Rng gen(11);
  const Image x = random_image({4, 4, 3}, gen);
  Rng rng(1);
  EXPECT_EQ(compose_identity().sample(x, rng), x);
  EXPECT_EQ(TransformDistribution::identity().sample(x, rng), x);
}

TEST(Families, FreshDrawsDiffer) {
  Rng gen(12);
  const Image x = random_image({16, 16, 1}, gen);
  const auto t = TransformDistribution::rotation();
  Rng rng(3);
  EXPECT_NE(t.sample(x, rng), t.sample(x, rng));
}

TEST(Families, ParseNamesAndShortForms) {
  EXPECT_EQ(parse_family("rot"), Family::rotation);
  EXPECT_EQ(parse_family("background"), Family::background);
  EXPECT_EQ(parse_family("dil"), Family::dilation_erosion);
  EXPECT_EQ(parse_family("none"), Family::identity);
  EXPECT_THROW(parse_family("blur"), std::invalid_argument);
}

TEST(TransformRecord, JsonRoundTrip) {
  for (const TransformParams& p : std::vector<TransformParams>{IdentityParams{}, RotationParams{1.25},
                                                                BackgroundParams{42}, MorphologyParams{MorphOp::erode, 2}}) {
    const TransformRecord r{p, 0xfeedULL};
    const TransformRecord back = record_from_json(to_json(r));
    EXPECT_EQ(back.params, r.params);
    EXPECT_EQ(back.seed, r.seed);
  }
}
