#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "helpers.hpp"
#include "invlab/metrics/metrics.hpp"
#include "invlab/nuisance/transforms.hpp"

using namespace invlab;
using namespace invlab::metrics;

namespace {

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (double& v : p) v = -std::log(1.0 - rng.uniform());  // exponential -> Dirichlet(1)
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= s;
  return p;
}

// Output depends only on pixel (0, 0): 0 maps to uniform, v > 0 to table[v].
class TableClassifier final : public ProbabilisticClassifier {
 public:
  explicit TableClassifier(std::vector<std::vector<double>> table) : table_(std::move(table)) {}
  int num_classes() const override { return 2; }
  std::vector<double> predict_proba(std::span<const ImageView> images) const override {
    std::vector<double> out;
    for (const auto& x : images) {
      const int v = x.at(0, 0);
      const auto& p = v == 0 ? uniform_ : table_.at(static_cast<std::size_t>(v));
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> table_;
  std::vector<double> uniform_{0.5, 0.5};
};

// Always the same distribution.
class ConstantClassifier final : public ProbabilisticClassifier {
 public:
  int num_classes() const override { return 3; }
  std::vector<double> predict_proba(std::span<const ImageView> images) const override {
    std::vector<double> out;
    for (std::size_t i = 0; i < images.size(); ++i) out.insert(out.end(), {0.2, 0.3, 0.5});
    return out;
  }
};

// Softmax of (mean brightness of left half, of right half, 0), sensitive to
// geometric transforms.
class HalvesClassifier final : public ProbabilisticClassifier {
 public:
  int num_classes() const override { return 3; }
  std::vector<double> predict_proba(std::span<const ImageView> images) const override {
    std::vector<double> out;
    for (const auto& x : images) {
      double l = 0, r = 0;
      for (int i = 0; i < x.height(); ++i)
        for (int j = 0; j < x.width(); ++j) (j < x.width() / 2 ? l : r) += x.at(i, j) / 255.0;
      const double n = x.height() * x.width() / 2.0;
      const double z[3] = {4 * l / n, 4 * r / n, 0.0};
      const double m = std::max({z[0], z[1], z[2]});
      double s = 0;
      for (double v : z) s += std::exp(v - m);
      for (double v : z) out.push_back(std::exp(v - m) / s);
    }
    return out;
  }
};

// Copies the marker pixel (0, 1) into (0, 0).
class RevealMarker final : public TransformSampler {
 public:
  Image sample(ImageView x, Rng&) const override {
    Image out(x);
    out.at(0, 0) = x.at(0, 1);
    return out;
  }
  void check_shape(const ImageShape&) const override {}
  std::string name() const override { return "reveal"; }
};

// Two-class distribution (a, 1 - a) with KL(uniform || .) equal to `target`,
// found by bisection on a in (0, 0.5].
std::vector<double> with_kl_from_uniform(double target) {
  double lo = 1e-9, hi = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::vector<double> q{mid, 1 - mid};
    const double kl = 0.5 * std::log(0.5 / q[0]) + 0.5 * std::log(0.5 / q[1]);
    (kl > target ? lo : hi) = mid;
  }
  return {lo, 1 - lo};
}

data::LabeledImageDataset random_dataset(int classes, std::size_t n, ImageShape shape, std::uint64_t seed) {
  Rng rng(seed);
  data::LabeledImageDataset ds(shape, classes);
  for (std::size_t i = 0; i < n; ++i) ds.add(testutil::random_image(shape, rng), static_cast<int>(i % classes));
  return ds;
}

}  // namespace

TEST(Kl, HandComputedExample) {
  const std::vector<double> p{0.5, 0.5}, q{0.9, 0.1};
  EXPECT_NEAR(kl_divergence(p, q), 0.5 * std::log(5.0 / 9.0) + 0.5 * std::log(5.0), 1e-12);
  EXPECT_NEAR(kl_divergence(p, q), 0.5108, 1e-4);
  EXPECT_DOUBLE_EQ(kl_divergence(p, p), 0.0);
}

TEST(Kl, GibbsInequalityOnRandomPairs) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.below(10);
    const auto p = random_simplex(rng, n), q = random_simplex(rng, n);
    ASSERT_GE(kl_divergence(p, q), 0.0);
  }
}

TEST(Kl, RejectsNanAndLengthMismatch) {
  const std::vector<double> p{0.5, 0.5}, bad{std::nan(""), 1.0}, three{0.2, 0.3, 0.5};
  EXPECT_THROW(kl_divergence(p, bad), std::invalid_argument);
  EXPECT_THROW(kl_divergence(p, three), std::invalid_argument);
}

TEST(Kl, FloorKeepsZeroMassFinite) {
  const std::vector<double> p{1.0, 0.0}, q{0.0, 1.0};
  EXPECT_TRUE(std::isfinite(kl_divergence(p, q)));
  EXPECT_GT(kl_divergence(p, q), 20.0);
}

TEST(ProbVector, ValidatesSimplex) {
  EXPECT_NO_THROW(ProbVector({0.25, 0.75}));
  EXPECT_THROW(ProbVector({0.5, 0.6}), std::invalid_argument);
  EXPECT_THROW(ProbVector({-0.1, 1.1}), std::invalid_argument);
}

TEST(Ekld, ConstantClassifierIsZeroEverywhere) {
  const auto ds = random_dataset(3, 30, {8, 8, 1}, 2);
  const auto rot = nuisance::TransformDistribution::rotation();
  const auto r = estimate_ekld(ConstantClassifier{}, ds, rot, {4, 1, 7});
  EXPECT_EQ(r.overall_ekld, 0.0);
  for (const auto& e : r.per_class_ekld) EXPECT_EQ(e.value(), 0.0);
}

TEST(Ekld, IdentityTransformIsZeroForAnyClassifier) {
  const auto ds = random_dataset(3, 30, {8, 8, 1}, 3);
  const auto r = estimate_ekld(HalvesClassifier{}, ds, nuisance::TransformDistribution::identity(), {3, 5, 256});
  EXPECT_EQ(r.overall_ekld, 0.0);
  for (double v : r.per_input_ekld) EXPECT_EQ(v, 0.0);
}

TEST(Ekld, ClassEntryIsMeanOverInputs) {
  // Two class-0 inputs whose single-draw divergences are 0.2 and 0.4.
  const TableClassifier clf({{}, with_kl_from_uniform(0.2), with_kl_from_uniform(0.4)});
  data::LabeledImageDataset ds({1, 2, 1}, 2);
  ds.add(Image({1, 2, 1}, std::vector<std::uint8_t>{0, 1}), 0);
  ds.add(Image({1, 2, 1}, std::vector<std::uint8_t>{0, 2}), 0);
  const auto r = estimate_ekld(clf, ds, RevealMarker{}, {1, 0, 256});
  ASSERT_EQ(r.per_input_ekld.size(), 2u);
  EXPECT_NEAR(r.per_input_ekld[0], 0.2, 1e-9);
  EXPECT_NEAR(r.per_input_ekld[1], 0.4, 1e-9);
  EXPECT_NEAR(r.per_class_ekld[0].value(), 0.3, 1e-9);
  EXPECT_FALSE(r.per_class_ekld[1].has_value());  // missing, not zero
  EXPECT_EQ(r.per_class_counts[1], 0);
}

TEST(Ekld, OverallIsCountWeightedMeanOfClasses) {
  data::LabeledImageDataset ds({8, 8, 1}, 3);
  Rng rng(4);
  const int counts[3] = {17, 5, 10};
  for (int c = 0; c < 3; ++c)
    for (int k = 0; k < counts[c]; ++k) ds.add(testutil::random_image({8, 8, 1}, rng), c);
  const auto r = estimate_ekld(HalvesClassifier{}, ds, nuisance::TransformDistribution::rotation(), {2, 9, 7});
  double weighted = 0.0;
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(r.per_class_counts[c], counts[c]);
    weighted += counts[c] * r.per_class_ekld[c].value();
    EXPECT_GE(r.per_class_ekld[c].value(), 0.0);
  }
  EXPECT_NEAR(r.overall_ekld, weighted / 32.0, 1e-9);
  EXPECT_GT(r.overall_ekld, 0.0);

  data::LabeledImageDataset four({8, 8, 1}, 4);
  four.add(testutil::random_image({8, 8, 1}, rng), 3);
  EXPECT_THROW(estimate_ekld(HalvesClassifier{}, four, nuisance::TransformDistribution::rotation()), std::invalid_argument);
}

TEST(Ekld, DeterministicAndIndependentOfBatchSize) {
  const auto ds = random_dataset(3, 25, {8, 8, 1}, 5);
  const auto rot = nuisance::TransformDistribution::rotation();
  const auto a = estimate_ekld(HalvesClassifier{}, ds, rot, {3, 11, 256});
  const auto b = estimate_ekld(HalvesClassifier{}, ds, rot, {3, 11, 4});
  EXPECT_EQ(a.per_input_ekld, b.per_input_ekld);
  const auto c = estimate_ekld(HalvesClassifier{}, ds, rot, {3, 12, 256});
  EXPECT_NE(a.per_input_ekld, c.per_input_ekld);
}

TEST(Ekld, MoreSamplesStayWithinBootstrapError) {
  const auto ds = random_dataset(3, 60, {8, 8, 1}, 6);
  const auto rot = nuisance::TransformDistribution::rotation();
  const auto few = estimate_ekld(HalvesClassifier{}, ds, rot, {8, 1, 256});
  const auto more = estimate_ekld(HalvesClassifier{}, ds, rot, {16, 1, 256});
  const double se = bootstrap_standard_error(few.per_input_ekld, 500, 3);
  EXPECT_GT(se, 0.0);
  EXPECT_LT(std::abs(more.overall_ekld - few.overall_ekld), 2 * se);
}

TEST(Ekld, ReportSerializes) {
  const auto ds = random_dataset(3, 9, {8, 8, 1}, 7);
  auto r = estimate_ekld(HalvesClassifier{}, ds, nuisance::TransformDistribution::rotation(), {2, 3, 256});
  const auto back = EKLDReport::from_json(r.to_json());
  EXPECT_EQ(back.per_class_ekld, r.per_class_ekld);
  EXPECT_EQ(back.per_input_ekld, r.per_input_ekld);
  EXPECT_EQ(back.seed, 3u);

  std::ostringstream os;
  const std::vector<std::int64_t> sizes{50, 20, 5};
  r.write_csv(os, sizes);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "class_index,class_size,ekld_nats,n_samples");
  std::getline(is, line);
  EXPECT_EQ(line.substr(0, 5), "0,50,");
}

TEST(MeanEkldOver, SkipsMissingClasses) {
  EKLDReport r;
  r.per_class_ekld = {0.1, std::nullopt, 0.5};
  const std::vector<int> cls{0, 1, 2};
  EXPECT_NEAR(mean_ekld_over(r, cls), 0.3, 1e-12);
}

TEST(BalancedAccuracy, Examples) {
  const std::vector<int> y{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(balanced_accuracy(y, y, 3), 1.0);
  const std::vector<int> y2{0, 0, 1, 1}, zeros{0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(balanced_accuracy(zeros, y2, 2), 0.5);
  // Per-class accuracies (1, 0.5, 0) with very different class sizes.
  const std::vector<int> labels{0, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2};
  std::vector<int> pred = labels;
  pred[1] = pred[2] = 0;
  for (std::size_t i = 5; i < pred.size(); ++i) pred[i] = 1;
  EXPECT_DOUBLE_EQ(balanced_accuracy(pred, labels, 3), 0.5);
  const auto acc = per_class_accuracy(pred, labels, 3);
  EXPECT_EQ(acc.counts, (std::vector<std::int64_t>{1, 4, 9}));
}

TEST(BalancedAccuracy, RejectsEmptyClass) {
  const std::vector<int> y{0, 0};
  EXPECT_THROW(balanced_accuracy(y, y, 2), std::invalid_argument);
}

TEST(BalancedAccuracy, FromClassifier) {
  const TableClassifier clf({{}, {0.9, 0.1}, {0.1, 0.9}});
  data::LabeledImageDataset ds({1, 1, 1}, 2);
  ds.add(Image({1, 1, 1}, 1), 0);
  ds.add(Image({1, 1, 1}, 2), 1);
  ds.add(Image({1, 1, 1}, 1), 1);
  EXPECT_DOUBLE_EQ(balanced_accuracy(clf, ds), 0.75);
}

TEST(Spearman, PerfectAndConstant) {
  const std::vector<double> x{1, 2, 3, 4, 5}, down{9, 7, 5, 3, 1}, flat(5, 0.3);
  EXPECT_NEAR(spearman(x, down), -1.0, 1e-12);
  EXPECT_EQ(spearman(x, flat), 0.0);
}

TEST(Spearman, MidranksForTies) {
  const std::vector<double> v{10, 20, 20, 5};
  EXPECT_EQ(midranks(v), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(TrendStatistic, MatchesRankEnumeration) {
  const std::vector<std::int64_t> sizes{100, 50, 20, 5};
  const std::vector<double> ekld{0.1, 0.2, 0.15, 0.4};
  // Rank of each value = 1 + number of strictly smaller values (no ties here),
  // then rho = 1 - 6 * sum(d^2) / (n (n^2 - 1)).
  const auto rank = [](auto const& v, std::size_t i) {
    int r = 1;
    for (auto const& w : v) r += w < v[i];
    return r;
  };
  double d2 = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const int d = rank(sizes, i) - rank(ekld, i);
    d2 += d * d;
  }
  const double oracle = 1.0 - 6.0 * d2 / (4.0 * 15.0);

  EKLDReport r;
  for (double e : ekld) r.per_class_ekld.emplace_back(e);
  EXPECT_NEAR(ekld_trend_statistic(r, sizes), oracle, 1e-12);
  EXPECT_NEAR(oracle, -0.8, 1e-12);
}

TEST(TrendStatistic, DecreasingIsMinusOne) {
  EKLDReport r;
  r.per_class_ekld = {0.01, 0.05, std::nullopt, 0.3};
  const std::vector<std::int64_t> sizes{1000, 100, 50, 10};
  EXPECT_NEAR(ekld_trend_statistic(r, sizes), -1.0, 1e-12);
}

TEST(TrendStatistic, RejectsTooFewClassesOrTiedSizes) {
  EKLDReport r;
  r.per_class_ekld = {0.1, 0.2, std::nullopt};
  const std::vector<std::int64_t> sizes{3, 2, 1};
  EXPECT_THROW(ekld_trend_statistic(r, sizes), std::invalid_argument);
  r.per_class_ekld = {0.1, 0.2, 0.3};
  const std::vector<std::int64_t> tied{4, 4, 4};
  EXPECT_THROW(ekld_trend_statistic(r, tied), std::domain_error);
}
