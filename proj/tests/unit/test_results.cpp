#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "invlab/exp/figures.hpp"
#include "invlab/exp/results.hpp"

using namespace invlab;
using namespace invlab::exp;

namespace {

// Two-sided 95% Student-t quantiles t_{0.975, df}.
constexpr double kT1 = 12.706204736174704;
constexpr double kT4 = 2.7764451051977987;
constexpr double kT29 = 2.045229642132703;

double sample_sd(std::span<const double> v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

ResultRow ok_row(std::string method, std::uint64_t seed, double acc, double tail) {
  return {std::move(method), seed, acc, 0.5 * tail, tail, "replicate-" + std::to_string(seed) + "/ekld.json", ""};
}

}  // namespace

TEST(TInterval, MatchesQuantileTable) {
  const std::vector<double> two{1.0, 3.0};
  const auto a = t_interval(two);
  EXPECT_DOUBLE_EQ(a.mean, 2.0);
  EXPECT_NEAR(a.half_width, kT1 * sample_sd(two) / std::sqrt(2.0), 1e-9);

  const std::vector<double> five{0.61, 0.64, 0.59, 0.66, 0.62};
  EXPECT_NEAR(t_interval(five).half_width, kT4 * sample_sd(five) / std::sqrt(5.0), 1e-9);

  std::vector<double> thirty;
  for (int i = 0; i < 30; ++i) thirty.push_back(std::sin(i));
  EXPECT_NEAR(t_interval(thirty).half_width, kT29 * sample_sd(thirty) / std::sqrt(30.0), 1e-9);
}

TEST(TInterval, DegenerateInputs) {
  const std::vector<double> one{0.7};
  const auto i = t_interval(one);
  EXPECT_EQ(i.n, 1u);
  EXPECT_TRUE(std::isnan(i.half_width));
  const std::vector<double> same(4, 0.25);
  EXPECT_EQ(t_interval(same).half_width, 0.0);
  const auto none = t_interval({});
  EXPECT_EQ(none.n, 0u);
  EXPECT_TRUE(std::isnan(none.mean));
}

TEST(ResultsTable, UpsertReplacesSameMethodAndSeed) {
  ResultsTable t;
  t.upsert(ok_row("CE+DRS", 1, 0.5, 0.2));
  t.upsert(ok_row("CE+DRS", 2, 0.6, 0.1));
  t.upsert(ok_row("CE+DRS", 1, 0.55, 0.15));
  EXPECT_EQ(t.rows().size(), 2u);
  EXPECT_EQ(t.rows_for("CE+DRS")[0].balanced_accuracy, 0.55);
}

TEST(ResultsTable, CsvRoundTripIncludingFailures) {
  ResultsTable t;
  t.upsert(ok_row("CE", 1, 0.123456789012345678, 0.3));
  t.upsert(ok_row("CE+DRS+GIT", 2, 0.7, 1e-17));
  t.upsert({"CE+DRS+GIT", 3, std::nullopt, std::nullopt, std::nullopt, "", "MIITN checkpoint not found, \"x\""});
  testutil::TempDir dir("results");
  t.write_csv(dir.path() / "r.csv");
  EXPECT_EQ(ResultsTable::read_csv(dir.path() / "r.csv"), t);
  EXPECT_EQ(t.failures(), 1u);

  std::ostringstream os;
  t.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "method,seed,balanced_accuracy,overall_ekld,tail_ekld,ekld_report,error");
}

TEST(ResultsTable, SummaryUsesSuccessfulRowsOnly) {
  ResultsTable t;
  const std::vector<double> acc{0.60, 0.62, 0.64};
  for (std::size_t i = 0; i < acc.size(); ++i) t.upsert(ok_row("CE+DRS", i + 1, acc[i], 0.1 * (i + 1)));
  t.upsert({"CE+DRS", 9, std::nullopt, std::nullopt, std::nullopt, "", "boom"});
  t.upsert(ok_row("CE", 1, 0.5, 0.9));
  const auto s = t.summarize();
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].method, "CE+DRS");
  EXPECT_EQ(s[0].missing, 1u);
  EXPECT_EQ(s[0].balanced_accuracy.n, 3u);
  EXPECT_NEAR(s[0].balanced_accuracy.mean, 0.62, 1e-12);
  EXPECT_NEAR(s[0].tail_ekld.mean, 0.2, 1e-12);

  std::ostringstream os;
  t.write_summary(os);
  EXPECT_NE(os.str().find("CE+DRS"), std::string::npos);
  EXPECT_NE(os.str().find("62.00"), std::string::npos);  // accuracy shown in percent
}

TEST(Figures, CsvHasOneRowPerMethodReplicateAndClass) {
  std::vector<ClassCurve> curves;
  const std::vector<std::int64_t> sizes{5, 40, 40, 10};
  for (const std::string m : {"A", "B"})
    for (std::uint64_t s = 1; s <= 3; ++s)
      curves.push_back({m, s, sizes, {0.1 * s, 0.2, std::nullopt, 0.4}});
  testutil::TempDir dir("fig");
  const auto files = emit_ekld_figure(curves, dir.path() / "ekld");
  EXPECT_EQ(count_lines(files.csv), 1 + 2 * 3 * 4u);
  EXPECT_TRUE(std::filesystem::file_size(files.svg) > 0);
  EXPECT_TRUE(std::filesystem::file_size(files.png) > 0);

  std::ifstream in(files.csv);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "method,seed,rank,class_index,class_size,value");
  // Ranks count from 1 at the largest class; ties go to the lower index.
  EXPECT_EQ(first, "A,1,1,1,40,0.2");
}

TEST(Figures, RankAggregation) {
  const std::vector<std::int64_t> sizes{10, 30, 20};
  std::vector<ClassCurve> curves;
  curves.push_back({"M", 1, sizes, {1.0, 0.0, 0.0}});
  curves.push_back({"M", 2, sizes, {3.0, 0.0, 0.0}});
  curves.push_back({"Z", 1, sizes, {0.0, 0.0, 0.0}});
  const auto series = aggregate_by_rank(curves);
  ASSERT_EQ(series.size(), 2u);
  EXPECT_EQ(series[0].method, "M");
  EXPECT_EQ(series[0].mean_size, (std::vector<double>{30, 20, 10}));
  EXPECT_DOUBLE_EQ(series[0].mean[2], 2.0);
  EXPECT_NEAR(series[0].upper[2] - 2.0, kT1 * std::sqrt(2.0) / std::sqrt(2.0), 1e-9);
  // A constant-zero curve stays flat with a zero-width band.
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(series[1].mean[r], 0.0);
    EXPECT_EQ(series[1].lower[r], 0.0);
    EXPECT_EQ(series[1].upper[r], 0.0);
  }
}
