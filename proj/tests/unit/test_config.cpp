#include <gtest/gtest.h>

#include <set>

#include "helpers.hpp"
#include "invlab/exp/config.hpp"

using namespace invlab;
using namespace invlab::exp;

namespace {

ExperimentConfig git_config() {
  ExperimentConfig c = ExperimentConfig::preset("glyph49");
  c.variant.family = nuisance::Family::background;
  c.schedule.strategy.schedule = strategies::Schedule::drs;
  c.git.generator = train::GeneratorKind::miitn;
  c.git.miitn_checkpoint = "ckpt/miitn-{seed}.pt";
  c.git.cutoff = 25;
  c.seeds = {1, 2, 3};
  return c;
}

}  // namespace

TEST(Config, PresetDefaults) {
  const auto k = ExperimentConfig::preset("k49");
  EXPECT_EQ(k.variant.base, "k49");
  EXPECT_EQ(k.variant.head_size, 4828);
  EXPECT_EQ(k.variant.floor, 5);
  EXPECT_EQ(k.schedule.epochs, 50);
  EXPECT_EQ(k.architecture, "simple_cnn");
  const auto c = ExperimentConfig::preset("cifar10");
  EXPECT_EQ(c.architecture, "resnet32");
  EXPECT_EQ(c.schedule.epochs, 200);
  EXPECT_THROW(ExperimentConfig::preset("svhn"), std::invalid_argument);
}

TEST(Config, SerializeParseRoundTrip) {
  const ExperimentConfig c = git_config();
  const ExperimentConfig back = ExperimentConfig::parse(c.serialize());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.content_hash(), c.content_hash());

  testutil::TempDir dir("cfg");
  c.save(dir.path() / "x.conf");
  EXPECT_EQ(ExperimentConfig::load(dir.path() / "x.conf"), c);
}

TEST(Config, ParsesCommentsAndPartialFiles) {
  const auto c = ExperimentConfig::parse(
      "# background variant\n"
      "base = glyph49\n"
      "family = bg   # trailing comment\n"
      "\n"
      "schedule = drs\n"
      "git.generator = oracle\n"
      "git.oracle_family = bg\n"
      "git.cutoff = all\n"
      "seeds = 1,2,3,4,5\n"
      "milestones = 30,40\n");
  EXPECT_EQ(c.variant.family, nuisance::Family::background);
  EXPECT_EQ(c.git.generator, train::GeneratorKind::oracle);
  EXPECT_FALSE(c.git.cutoff.has_value());
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(c.schedule.epochs, 50);  // default kept
  EXPECT_EQ(c.method_label(), "CE+DRS+Oracle");
}

TEST(Config, RejectsUnknownDuplicateAndMalformed) {
  EXPECT_THROW(ExperimentConfig::parse("epochz = 3\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("epochs = 3\nepochs = 4\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("just words\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("epochs = many\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/x.conf"), ConfigError);
}

TEST(Config, ValidateCatchesInconsistency) {
  auto c = git_config();
  EXPECT_NO_THROW(c.validate());
  c.schedule.strategy.switch_epoch = c.schedule.epochs;
  EXPECT_THROW(c.validate(), ConfigError);

  auto o = ExperimentConfig::preset("glyph49");
  o.git.generator = train::GeneratorKind::oracle;  // oracle without a family
  EXPECT_THROW(o.validate(), ConfigError);

  auto s = ExperimentConfig::preset("glyph49");
  s.seeds.clear();
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Config, HashIgnoresBookkeepingOnly) {
  const auto a = git_config();
  auto b = a;
  b.seeds = {9};
  b.output_dir = "elsewhere";
  b.label = "renamed";
  EXPECT_EQ(a.content_hash(), b.content_hash());
  EXPECT_EQ(a.content_hash().size(), 16u);

  auto c = a;
  c.schedule.lr = 0.05;
  EXPECT_NE(a.content_hash(), c.content_hash());
  auto d = a;
  d.variant.data_seed = 1;
  EXPECT_NE(a.content_hash(), d.content_hash());
}

TEST(Config, MethodLabels) {
  auto c = git_config();
  EXPECT_EQ(c.method_label(), "CE+DRS+GIT");
  c.git.cutoff.reset();
  EXPECT_EQ(c.method_label(), "CE+DRS+GIT(all)");
  c.label = "custom";
  EXPECT_EQ(c.method_label(), "custom");
  EXPECT_EQ(ExperimentConfig::preset("k49").method_label(), "CE");
}

TEST(Config, CheckpointTemplate) {
  const auto c = git_config();
  EXPECT_EQ(c.miitn_checkpoint_for(4), std::filesystem::path("ckpt/miitn-4.pt"));
}

TEST(Config, EveryKeyIsDocumented) {
  const auto keys = ExperimentConfig::documented_keys();
  std::set<std::string> documented;
  for (const auto& k : keys) {
    documented.insert(k[0]);
    EXPECT_FALSE(k[2].empty()) << k[0];
  }
  for (const auto& [key, value] : git_config().to_kv()) EXPECT_TRUE(documented.count(key)) << key;
}

TEST(Fnv1a, ReferenceValues) {
  // Published FNV-1a 64-bit test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}
