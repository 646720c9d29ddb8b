#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "invlab/data/dataset.hpp"
#include "invlab/exp/config.hpp"
#include "invlab/exp/results.hpp"
#include "invlab/metrics/metrics.hpp"

namespace invlab::exp {

/// Base splits after the one-shot nuisance transform. Built once per
/// (base, family, data_seed, variability) and shared within the process.
std::shared_ptr<const data::DatasetSplits> load_variant_splits(const VariantSpec& variant);

/// The long-tail plan of a variant ordered by the replicate seed.
data::LongTailPlan replicate_plan(const VariantSpec& variant, std::uint64_t seed);

/// Long-tailed training set of one replicate.
data::LabeledImageDataset replicate_training_set(const VariantSpec& variant, std::uint64_t seed);

/// Classes holding the `count` smallest targets of a plan, smallest last.
std::vector<int> smallest_classes(const data::LongTailPlan& plan, std::size_t count);

/// Everything persisted for one (config, seed).
struct ReplicateResult {
  ResultRow row;
  std::vector<std::int64_t> class_sizes;  // training size per class
  std::vector<int> class_order;           // class at each size rank
  std::vector<std::optional<double>> per_class_accuracy;
  metrics::EKLDReport ekld;
  std::vector<train::EpochRecord> history;
};

/// output_dir/<content hash>
std::filesystem::path experiment_dir(const ExperimentConfig& config);
/// output_dir/<content hash>/replicate-<seed>
std::filesystem::path replicate_dir(const ExperimentConfig& config, std::uint64_t seed);

/// Trains and evaluates one replicate and writes it under replicate_dir().
/// Ignores any cached result.
ReplicateResult run_replicate(const ExperimentConfig& config, std::uint64_t seed);

/// A completed replicate from disk, if present.
std::optional<ReplicateResult> load_replicate(const ExperimentConfig& config, std::uint64_t seed);

struct RunOptions {
  /// Retrain even when a completed replicate exists.
  bool force = false;
  std::function<void(const ReplicateResult&, bool cached)> on_replicate;
};

/// Runs every replicate seed of `config`, skipping completed ones. A failed
/// replicate is logged, its message kept in the row (and in error.txt), and
/// the sweep continues. Throws ConfigError for invalid configs.
ResultsTable run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace invlab::exp
