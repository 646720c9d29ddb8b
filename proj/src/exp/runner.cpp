#include "invlab/exp/runner.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include "invlab/core/log.hpp"
#include "invlab/data/bases.hpp"
#include "invlab/data/glyphs.hpp"
#include "invlab/data/longtail.hpp"
#include "invlab/miitn/miitn.hpp"
#include "invlab/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace invlab::exp {

namespace {

constexpr std::size_t kTailClasses = 10;

std::string variant_key(const VariantSpec& v) {
  std::ostringstream os;
  os << v.base << '|' << nuisance::to_string(v.family) << '|' << v.data_seed << '|' << v.glyph_variability;
  return os.str();
}

void write_json_atomic(const fs::path& path, const json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(1) << '\n';
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

std::shared_ptr<const TransformSampler> make_generator(const ExperimentConfig& config, std::uint64_t seed) {
  switch (config.git.generator) {
    case train::GeneratorKind::none: return nullptr;
    case train::GeneratorKind::oracle:
      return train::oracle_generator(nuisance::TransformDistribution::of(config.git.oracle_family));
    case train::GeneratorKind::miitn: {
      const fs::path ckpt = config.miitn_checkpoint_for(seed);
      if (!fs::exists(ckpt)) throw std::runtime_error("MIITN checkpoint not found: " + ckpt.string());
      auto model = std::make_shared<const miitn::MiitnModel>(miitn::MiitnModel::load(ckpt));
      return std::make_shared<miitn::MiitnGenerator>(model);
    }
  }
  return nullptr;
}

void write_accuracy_csv(const fs::path& path, const ReplicateResult& r) {
  std::ofstream out(path);
  out << "class_index,class_size,accuracy\n";
  out.precision(17);
  for (std::size_t c = 0; c < r.per_class_accuracy.size(); ++c) {
    out << c << ',' << r.class_sizes[c] << ',';
    if (r.per_class_accuracy[c]) out << *r.per_class_accuracy[c];
    out << '\n';
  }
}

json optional_array(const std::vector<std::optional<double>>& xs) {
  json a = json::array();
  for (const auto& x : xs) a.push_back(x ? json(*x) : json(nullptr));
  return a;
}

std::vector<std::optional<double>> optional_vector(const json& a) {
  std::vector<std::optional<double>> out;
  for (const auto& x : a) out.push_back(x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()));
  return out;
}

std::optional<double> optional_value(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::shared_ptr<const data::DatasetSplits> load_variant_splits(const VariantSpec& variant) {
  // Only the most recent variant is kept: a full base takes a few hundred MB.
  static std::mutex mutex;
  static std::string cached_key;
  static std::shared_ptr<const data::DatasetSplits> cached;
  const std::lock_guard lock(mutex);
  const std::string key = variant_key(variant);
  if (cached && cached_key == key) return cached;
  cached.reset();

  data::GlyphOptions glyph;
  glyph.variability = variant.glyph_variability;
  data::DatasetSplits base = data::load_base(variant.base, data::default_data_root(), glyph);
  const auto t = nuisance::TransformDistribution::of(variant.family);
  auto out = std::make_shared<data::DatasetSplits>();
  out->train = data::apply_oneshot_transform(base.train, t, derive_seed(variant.data_seed, {stream_id("train")}));
  out->test = data::apply_oneshot_transform(base.test, t, derive_seed(variant.data_seed, {stream_id("test")}));
  if (base.val) out->val = data::apply_oneshot_transform(*base.val, t, derive_seed(variant.data_seed, {stream_id("val")}));
  cached = out;
  cached_key = key;
  return cached;
}

data::LongTailPlan replicate_plan(const VariantSpec& variant, std::uint64_t seed) {
  const auto preset = data::base_preset(variant.base);
  return data::with_ordering(data::make_longtail_plan(preset.num_classes, variant.head_size, variant.law, variant.floor),
                             seed);
}

data::LabeledImageDataset replicate_training_set(const VariantSpec& variant, std::uint64_t seed) {
  const auto splits = load_variant_splits(variant);
  return data::build_longtail_dataset(splits->train, replicate_plan(variant, seed), seed);
}

std::vector<int> smallest_classes(const data::LongTailPlan& plan, std::size_t count) {
  count = std::min(count, plan.class_order.size());
  return {plan.class_order.end() - static_cast<std::ptrdiff_t>(count), plan.class_order.end()};
}

fs::path experiment_dir(const ExperimentConfig& config) { return config.output_dir / config.content_hash(); }

fs::path replicate_dir(const ExperimentConfig& config, std::uint64_t seed) {
  return experiment_dir(config) / ("replicate-" + std::to_string(seed));
}

ReplicateResult run_replicate(const ExperimentConfig& config, std::uint64_t seed) {
  const auto splits = load_variant_splits(config.variant);
  const auto plan = replicate_plan(config.variant, seed);
  const auto train_set = data::build_longtail_dataset(splits->train, plan, seed);
  const data::LabeledImageDataset& val = splits->val ? *splits->val : splits->test;
  const auto generator = make_generator(config, seed);

  const train::BackboneSpec spec{config.architecture, train_set.num_classes(), train_set.shape(), config.width};
  train::TrainHooks hooks;
  hooks.on_epoch = [&](const train::EpochRecord& r) {
    std::ostringstream msg;
    msg << config.method_label() << " seed " << seed << " epoch " << r.epoch + 1 << '/' << config.schedule.epochs
        << " loss " << r.loss << " val_bacc " << r.balanced_val_acc;
    log::debug(msg.str());
  };
  auto trained = train::train_classifier(train_set, &val, spec, config.schedule, config.git, generator.get(), seed, hooks);

  ReplicateResult r;
  r.class_sizes = train_set.class_sizes();
  r.class_order = plan.class_order;
  r.history = std::move(trained.history);

  const auto predictions = metrics::predict_labels(trained.classifier, splits->test);
  const auto labels = splits->test.labels();
  r.per_class_accuracy = metrics::per_class_accuracy(predictions, labels, train_set.num_classes()).per_class;
  const double bacc = metrics::balanced_accuracy(predictions, labels, train_set.num_classes());

  metrics::EKLDOptions eo;
  eo.samples_per_input = config.ekld_samples;
  eo.seed = config.ekld_seed;
  r.ekld = metrics::estimate_ekld(trained.classifier, splits->test,
                                  nuisance::TransformDistribution::of(config.variant.family), eo);

  const fs::path dir = replicate_dir(config, seed);
  fs::create_directories(dir);
  r.row.method = config.method_label();
  r.row.seed = seed;
  r.row.balanced_accuracy = bacc;
  r.row.overall_ekld = r.ekld.overall_ekld;
  const auto tail = smallest_classes(plan, kTailClasses);
  r.row.tail_ekld = metrics::mean_ekld_over(r.ekld, tail);
  r.row.ekld_report = (fs::path(config.content_hash()) / dir.filename() / "ekld.json").generic_string();

  trained.classifier.save(dir / "classifier.pt");
  train::write_history_csv(dir / "history.csv", r.history);
  r.ekld.write_csv(dir / "ekld.csv", r.class_sizes);
  write_json_atomic(dir / "ekld.json", r.ekld.to_json());
  write_accuracy_csv(dir / "accuracy.csv", r);
  fs::remove(dir / "error.txt");

  json result{{"method", r.row.method},
              {"seed", seed},
              {"config_hash", config.content_hash()},
              {"balanced_accuracy", bacc},
              {"overall_ekld", *r.row.overall_ekld},
              {"tail_ekld", *r.row.tail_ekld},
              {"class_sizes", r.class_sizes},
              {"class_order", r.class_order},
              {"per_class_accuracy", optional_array(r.per_class_accuracy)}};
  // Written last: its presence marks the replicate complete.
  write_json_atomic(dir / "result.json", result);
  return r;
}

std::optional<ReplicateResult> load_replicate(const ExperimentConfig& config, std::uint64_t seed) {
  const fs::path dir = replicate_dir(config, seed);
  if (!fs::exists(dir / "result.json")) return std::nullopt;
  const json j = read_json(dir / "result.json");
  ReplicateResult r;
  r.row.method = config.method_label();
  r.row.seed = seed;
  r.row.balanced_accuracy = optional_value(j, "balanced_accuracy");
  r.row.overall_ekld = optional_value(j, "overall_ekld");
  r.row.tail_ekld = optional_value(j, "tail_ekld");
  r.row.ekld_report = (fs::path(config.content_hash()) / dir.filename() / "ekld.json").generic_string();
  r.class_sizes = j.at("class_sizes").get<std::vector<std::int64_t>>();
  r.class_order = j.at("class_order").get<std::vector<int>>();
  r.per_class_accuracy = optional_vector(j.at("per_class_accuracy"));
  r.ekld = metrics::EKLDReport::from_json(read_json(dir / "ekld.json"));
  if (fs::exists(dir / "history.csv")) r.history = train::read_history_csv(dir / "history.csv");
  return r;
}

ResultsTable run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path dir = experiment_dir(config);
  fs::create_directories(dir);
  config.save(dir / "config.txt");

  ResultsTable table;
  for (const std::uint64_t seed : config.seeds) {
    if (!options.force) {
      if (auto cached = load_replicate(config, seed)) {
        log::info(config.method_label() + " seed " + std::to_string(seed) + ": cached");
        if (options.on_replicate) options.on_replicate(*cached, true);
        table.upsert(cached->row);
        continue;
      }
    }
    log::info(config.method_label() + " seed " + std::to_string(seed) + ": training");
    try {
      auto r = run_replicate(config, seed);
      if (options.on_replicate) options.on_replicate(r, false);
      table.upsert(r.row);
    } catch (const std::exception& e) {
      log::error(config.method_label() + " seed " + std::to_string(seed) + " failed: " + e.what());
      const fs::path rdir = replicate_dir(config, seed);
      fs::create_directories(rdir);
      std::ofstream(rdir / "error.txt") << e.what() << '\n';
      ResultRow row;
      row.method = config.method_label();
      row.seed = seed;
      row.error = e.what();
      table.upsert(row);
    }
  }
  table.write_csv(dir / "results.csv");
  return table;
}

}  // namespace invlab::exp
