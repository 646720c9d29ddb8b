#include <gtest/gtest.h>

#include <cstdlib>

#include "helpers.hpp"
#include "invlab/data/io.hpp"
#include "invlab/exp/runner.hpp"

using namespace invlab;
using namespace invlab::exp;
namespace fs = std::filesystem;

namespace {

constexpr ImageShape kShape{28, 28, 1};

// A tiny stand-in for the official k49 data in the portable layout: 7
// training and 2 test images per class, each a class-specific bar pattern
// plus noise.
class TinyK49 : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(1);
    data::DatasetSplits s;
    s.train = data::LabeledImageDataset(kShape, 49);
    s.test = data::LabeledImageDataset(kShape, 49);
    for (int c = 0; c < 49; ++c)
      for (int k = 0; k < 9; ++k) {
        Image x(kShape, 0);
        for (auto& p : x.data()) p = static_cast<std::uint8_t>(rng.below(40));
        for (int j = 0; j < 28; ++j) x.at(c % 28, j) = 255;
        for (int i = 0; i < 28; ++i) x.at(i, (c * 5) % 28) = 200;
        (k < 7 ? s.train : s.test).add(x, c);
      }
    data::write_portable(root_.path() / "data" / "k49", s);
    setenv("INVLAB_DATA_DIR", (root_.path() / "data").c_str(), 1);
  }

  ExperimentConfig config() const {
    ExperimentConfig c = ExperimentConfig::preset("k49");
    c.variant.family = nuisance::Family::rotation;
    c.variant.head_size = 6;
    c.variant.floor = 1;
    c.schedule.epochs = 1;
    c.schedule.batch_size = 16;
    c.schedule.milestones = {};
    c.width = 4;
    c.ekld_samples = 2;
    c.seeds = {1, 2};
    c.output_dir = root_.path() / "runs";
    return c;
  }

  testutil::TempDir root_{"runner"};
};

}  // namespace

TEST_F(TinyK49, PlanIsOrderedBySeed) {
  const auto c = config();
  const auto a = replicate_plan(c.variant, 1), b = replicate_plan(c.variant, 1), d = replicate_plan(c.variant, 2);
  EXPECT_EQ(a.class_order, b.class_order);
  EXPECT_NE(a.class_order, d.class_order);
  EXPECT_EQ(a.target_sizes, d.target_sizes);
  EXPECT_EQ(a.target_sizes.front(), 6);
  const auto tail = smallest_classes(a, 10);
  ASSERT_EQ(tail.size(), 10u);
  EXPECT_EQ(tail.back(), a.class_order.back());
  for (int cls : tail) EXPECT_EQ(a.target_for_class(cls), 1);

  const auto train = replicate_training_set(c.variant, 1);
  EXPECT_EQ(static_cast<std::int64_t>(train.size()), a.total());
  EXPECT_EQ(train.class_sizes()[static_cast<std::size_t>(a.class_order[0])], 6);
}

TEST_F(TinyK49, RunsCachesAndResumesBitIdentically) {
  const auto c = config();
  std::vector<bool> cached;
  RunOptions opt;
  opt.on_replicate = [&](const ReplicateResult&, bool was_cached) { cached.push_back(was_cached); };

  const ResultsTable first = run_experiment(c, opt);
  ASSERT_EQ(first.rows().size(), 2u);
  for (const auto& r : first.rows()) {
    ASSERT_TRUE(r.ok()) << r.error;
    EXPECT_GE(*r.balanced_accuracy, 0.0);
    EXPECT_GE(*r.tail_ekld, 0.0);
    EXPECT_EQ(r.method, "CE");
  }
  EXPECT_EQ(cached, (std::vector<bool>{false, false}));
  const fs::path dir = replicate_dir(c, 2);
  for (const char* f : {"result.json", "classifier.pt", "history.csv", "ekld.csv", "ekld.json", "accuracy.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_TRUE(fs::exists(experiment_dir(c) / "results.csv"));
  EXPECT_TRUE(fs::exists(experiment_dir(c) / "config.txt"));

  cached.clear();
  EXPECT_EQ(run_experiment(c, opt), first);
  EXPECT_EQ(cached, (std::vector<bool>{true, true}));

  // An interrupted sweep: replicate 2 never finished.
  fs::remove(dir / "result.json");
  cached.clear();
  EXPECT_EQ(run_experiment(c, opt), first);
  EXPECT_EQ(cached, (std::vector<bool>{true, false}));

  const auto loaded = load_replicate(c, 1);
  ASSERT_TRUE(loaded.has_value());
  EXPECT_EQ(loaded->row, first.rows()[0]);
  EXPECT_EQ(loaded->history.size(), 1u);
  EXPECT_EQ(loaded->class_sizes.size(), 49u);
}

TEST_F(TinyK49, ForceRetrainsToSameResult) {
  auto c = config();
  c.seeds = {3};
  const auto a = run_experiment(c);
  RunOptions force;
  force.force = true;
  bool saw_cached = true;
  force.on_replicate = [&](const ReplicateResult&, bool was_cached) { saw_cached = was_cached; };
  EXPECT_EQ(run_experiment(c, force), a);
  EXPECT_FALSE(saw_cached);
}

TEST_F(TinyK49, FailedReplicateIsRecordedAndSweepContinues) {
  auto c = config();
  c.git.generator = train::GeneratorKind::miitn;
  c.git.miitn_checkpoint = (root_.path() / "missing-{seed}.pt").string();
  const auto t = run_experiment(c);
  ASSERT_EQ(t.rows().size(), 2u);
  EXPECT_EQ(t.failures(), 2u);
  EXPECT_NE(t.rows()[0].error.find("missing-1.pt"), std::string::npos);
  EXPECT_TRUE(fs::exists(replicate_dir(c, 1) / "error.txt"));
  EXPECT_FALSE(load_replicate(c, 1).has_value());
}

TEST_F(TinyK49, InvalidConfigIsRejectedBeforeRunning) {
  auto c = config();
  c.schedule.milestones = {5};
  EXPECT_THROW(run_experiment(c), ConfigError);
  EXPECT_FALSE(fs::exists(experiment_dir(c)));
}
