// Command-line front end: dataset building, MIITN training and sampling,
// classifier sweeps, eKLD measurement and reporting.

#include <torch/torch.h>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "invlab/core/log.hpp"
#include "invlab/data/bases.hpp"
#include "invlab/data/io.hpp"
#include "invlab/exp/config.hpp"
#include "invlab/exp/figures.hpp"
#include "invlab/exp/runner.hpp"
#include "invlab/metrics/metrics.hpp"
#include "invlab/miitn/miitn.hpp"
#include "invlab/train/classifier.hpp"

namespace fs = std::filesystem;
using namespace invlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

exp::ExperimentConfig load_config(const std::string& path, const std::string& base) {
  if (!path.empty()) return exp::ExperimentConfig::load(path);
  return exp::ExperimentConfig::preset(base);
}

// data build ------------------------------------------------------------------

struct DataBuildArgs {
  std::string config, base = "glyph49", family, out, format = "portable";
  std::uint64_t seed = 1;
};

int data_build(const DataBuildArgs& a) {
  auto config = load_config(a.config, a.base);
  if (!a.family.empty()) config.variant.family = nuisance::parse_family(a.family);
  config.validate();
  const auto splits = exp::load_variant_splits(config.variant);
  const auto plan = exp::replicate_plan(config.variant, a.seed);
  data::DatasetSplits out;
  out.train = data::build_longtail_dataset(splits->train, plan, a.seed);
  out.test = splits->test;
  out.val = splits->val;
  if (a.format == "portable") {
    data::write_portable(a.out, out, {{"plan", plan.to_json()}, {"ordering_seed", a.seed}});
  } else if (a.format == "packed") {
    fs::create_directories(a.out);
    data::write_packed(fs::path(a.out) / "train.bin", out.train);
    data::write_packed(fs::path(a.out) / "test.bin", out.test);
    if (out.val) data::write_packed(fs::path(a.out) / "val.bin", *out.val);
    std::ofstream(fs::path(a.out) / "plan.json") << plan.to_json().dump(1) << '\n';
  } else {
    throw exp::ConfigError("unknown format '" + a.format + "' (portable|packed)");
  }
  std::cout << "wrote " << out.train.size() << " training examples (" << plan.total() << " planned) to " << a.out
            << '\n';
  return kExitOk;
}

// miitn -------------------------------------------------------------------------

struct MiitnTrainArgs {
  std::string config, base = "glyph49", data, out, arch = "desk";
  std::uint64_t seed = 1, init_seed = 0;
  std::int64_t steps = 10000;
};

int miitn_train(const MiitnTrainArgs& a) {
  data::LabeledImageDataset train_set;
  if (!a.data.empty()) {
    train_set = data::read_portable(a.data).train;
  } else {
    auto config = load_config(a.config, a.base);
    config.validate();
    train_set = exp::replicate_training_set(config.variant, a.seed);
  }
  miitn::TrainOptions options;
  options.steps = a.steps;
  options.checkpoint = a.out;
  options.on_log = [](const miitn::StepLosses& s) {
    std::cout << "step " << s.step << " image " << s.image_recon << " style " << s.style_recon << " content "
              << s.content_recon << " adv " << s.adversarial << " dis " << s.discriminator << '\n';
  };
  const auto outcome = miitn::train_miitn(train_set, miitn::Architecture::preset(a.arch), options,
                                          a.init_seed != 0 ? a.init_seed : a.seed);
  std::cout << "checkpoint " << a.out << ", loss curve " << a.out << ".curve.csv\n";
  return outcome.model ? kExitOk : kExitFailure;
}

struct MiitnSampleArgs {
  std::string checkpoint, data, out;
  std::size_t count = 16;
  int draws = 4;
  std::uint64_t seed = 0;
};

int miitn_sample(const MiitnSampleArgs& a) {
  auto model = std::make_shared<const miitn::MiitnModel>(miitn::MiitnModel::load(a.checkpoint));
  const auto splits = data::read_portable(a.data);
  const auto& source = splits.test;
  fs::create_directories(a.out);
  const std::size_t n = std::min(a.count, source.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = source.id(i);
    data::write_png(fs::path(a.out) / ("input-" + std::to_string(id) + ".png"), source.image(i));
    Rng rng(derive_seed(a.seed, {id}));
    for (int k = 0; k < a.draws; ++k)
      data::write_png(fs::path(a.out) / ("input-" + std::to_string(id) + "-draw-" + std::to_string(k) + ".png"),
                      model->sample_transform(source.image(i), rng));
  }
  std::cout << "wrote " << n << " inputs with " << a.draws << " draws each to " << a.out << '\n';
  return kExitOk;
}

// train -------------------------------------------------------------------------

int run_train(const std::string& config_path, bool force, const std::vector<std::uint64_t>& seeds) {
  auto config = exp::ExperimentConfig::load(config_path);
  if (!seeds.empty()) config.seeds = seeds;
  exp::RunOptions options;
  options.force = force;
  const auto table = exp::run_experiment(config, options);
  table.write_summary(std::cout);
  std::cout << "results: " << (exp::experiment_dir(config) / "results.csv").string() << '\n';
  return table.failures() == 0 ? kExitOk : kExitPartial;
}

// measure ekld ------------------------------------------------------------------

struct MeasureArgs {
  std::string classifier, data, config, family, out;
  std::uint64_t seed = 0;
  int samples = 8;
};

int measure_ekld(const MeasureArgs& a) {
  const auto classifier = train::TorchClassifier::load(a.classifier);
  data::LabeledImageDataset held_out;
  nuisance::Family family = nuisance::Family::identity;
  std::vector<std::int64_t> sizes;
  if (!a.data.empty()) {
    auto splits = data::read_portable(a.data);
    held_out = std::move(splits.test);
    sizes = splits.train.class_sizes();
  } else if (!a.config.empty()) {
    const auto config = exp::ExperimentConfig::load(a.config);
    held_out = exp::load_variant_splits(config.variant)->test;
    family = config.variant.family;
  } else {
    throw exp::ConfigError("measure ekld needs --data or --config");
  }
  if (!a.family.empty()) family = nuisance::parse_family(a.family);
  metrics::EKLDOptions options;
  options.samples_per_input = a.samples;
  options.seed = a.seed;
  const auto report =
      metrics::estimate_ekld(classifier, held_out, nuisance::TransformDistribution::of(family), options);
  if (!a.out.empty()) {
    report.write_csv(fs::path(a.out + ".csv"), sizes);
    std::ofstream(a.out + ".json") << report.to_json().dump(1) << '\n';
  }
  std::cout << "transform " << report.transform << " overall eKLD " << report.overall_ekld << " nats over "
            << held_out.size() << " inputs\n";
  return kExitOk;
}

// report ------------------------------------------------------------------------

int report(const std::vector<std::string>& configs, const std::string& out) {
  exp::ResultsTable table;
  std::vector<exp::ClassCurve> ekld, accuracy;
  bool missing = false;
  for (const auto& path : configs) {
    const auto config = exp::ExperimentConfig::load(path);
    config.validate();
    for (const auto seed : config.seeds) {
      const auto r = exp::load_replicate(config, seed);
      if (!r) {
        exp::ResultRow row;
        row.method = config.method_label();
        row.seed = seed;
        row.error = "not run";
        table.upsert(row);
        missing = true;
        continue;
      }
      table.upsert(r->row);
      ekld.push_back(exp::ekld_curve(r->row.method, seed, r->ekld, r->class_sizes));
      accuracy.push_back(exp::accuracy_curve(r->row.method, seed, r->per_class_accuracy, r->class_sizes));
    }
  }
  fs::create_directories(out);
  table.write_csv(fs::path(out) / "results.csv");
  std::ofstream summary(fs::path(out) / "summary.md");
  table.write_summary(summary);
  table.write_summary(std::cout);
  if (!ekld.empty()) {
    exp::emit_ekld_figure(ekld, fs::path(out) / "ekld_by_class");
    exp::emit_accuracy_by_class(accuracy, fs::path(out) / "accuracy_by_class");
  }
  return missing ? kExitPartial : kExitOk;
}

int print_defaults(const std::string& base) {
  const auto config = exp::ExperimentConfig::preset(base);
  const auto kv = config.to_kv();
  for (const auto& [key, def, doc] : exp::ExperimentConfig::documented_keys())
    std::cout << "# " << doc << '\n' << key << " = " << kv.at(key) << "\n\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  torch::set_num_threads(1);
  CLI::App app{"Long-tailed invariance experiments"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  auto* data_cmd = app.add_subcommand("data", "dataset variants")->require_subcommand(1);
  DataBuildArgs build;
  auto* build_cmd = data_cmd->add_subcommand("build", "write one replicate's long-tailed variant");
  build_cmd->add_option("--config", build.config, "experiment config (variant keys are used)");
  build_cmd->add_option("--base", build.base, "base dataset when no config is given");
  build_cmd->add_option("--family", build.family, "override the nuisance family (none|rot|bg|dil)");
  build_cmd->add_option("--seed", build.seed, "ordering seed");
  build_cmd->add_option("--format", build.format, "portable | packed");
  build_cmd->add_option("--out", build.out, "output directory")->required();

  auto* miitn_cmd = app.add_subcommand("miitn", "translation network")->require_subcommand(1);
  MiitnTrainArgs mt;
  auto* mt_cmd = miitn_cmd->add_subcommand("train", "train on one replicate's training set");
  mt_cmd->add_option("--config", mt.config, "experiment config");
  mt_cmd->add_option("--base", mt.base, "base dataset when no config is given");
  mt_cmd->add_option("--data", mt.data, "portable dataset directory instead of a config");
  mt_cmd->add_option("--seed", mt.seed, "replicate (ordering) seed");
  mt_cmd->add_option("--init-seed", mt.init_seed, "network and draw seed (default: --seed)");
  mt_cmd->add_option("--steps", mt.steps, "training steps");
  mt_cmd->add_option("--arch", mt.arch, "desk | full");
  mt_cmd->add_option("--out", mt.out, "checkpoint path (resumed when present)")->required();
  MiitnSampleArgs ms;
  auto* ms_cmd = miitn_cmd->add_subcommand("sample", "write translated samples as PNG");
  ms_cmd->add_option("--checkpoint", ms.checkpoint)->required();
  ms_cmd->add_option("--data", ms.data, "portable dataset directory (test split is sampled)")->required();
  ms_cmd->add_option("--count", ms.count, "number of inputs");
  ms_cmd->add_option("--draws", ms.draws, "draws per input");
  ms_cmd->add_option("--seed", ms.seed, "style-code seed");
  ms_cmd->add_option("--out", ms.out)->required();

  std::string train_config;
  bool force = false;
  std::vector<std::uint64_t> seeds;
  auto* train_cmd = app.add_subcommand("train", "run every replicate of an experiment config");
  train_cmd->add_option("--config", train_config)->required();
  train_cmd->add_option("--seeds", seeds, "override the replicate seeds")->delimiter(',');
  train_cmd->add_flag("--force", force, "retrain completed replicates");

  auto* measure_cmd = app.add_subcommand("measure", "evaluation")->require_subcommand(1);
  MeasureArgs me;
  auto* ekld_cmd = measure_cmd->add_subcommand("ekld", "per-class eKLD of a trained classifier");
  ekld_cmd->add_option("--classifier", me.classifier)->required();
  ekld_cmd->add_option("--data", me.data, "portable dataset directory (test split)");
  ekld_cmd->add_option("--config", me.config, "experiment config (its variant's test split)");
  ekld_cmd->add_option("--family", me.family, "nuisance family (none|rot|bg|dil)");
  ekld_cmd->add_option("--samples", me.samples, "draws per input");
  ekld_cmd->add_option("--seed", me.seed, "draw seed");
  ekld_cmd->add_option("--out", me.out, "output stem for .csv and .json");

  std::vector<std::string> report_configs;
  std::string report_out = "report";
  auto* report_cmd = app.add_subcommand("report", "tables and figures from completed replicates");
  report_cmd->add_option("--config", report_configs, "experiment configs")->required();
  report_cmd->add_option("--out", report_out, "output directory");

  std::string defaults_base = "glyph49";
  auto* defaults_cmd = app.add_subcommand("defaults", "print every config key with its default");
  defaults_cmd->add_option("--base", defaults_base);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (verbose) log::set_level(log::Level::debug);

  try {
    if (build_cmd->parsed()) return data_build(build);
    if (mt_cmd->parsed()) return miitn_train(mt);
    if (ms_cmd->parsed()) return miitn_sample(ms);
    if (train_cmd->parsed()) return run_train(train_config, force, seeds);
    if (ekld_cmd->parsed()) return measure_ekld(me);
    if (report_cmd->parsed()) return report(report_configs, report_out);
    if (defaults_cmd->parsed()) return print_defaults(defaults_base);
  } catch (const exp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitConfig;
}
