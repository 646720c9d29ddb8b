#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "invlab/core/sampler.hpp"
#include "invlab/data/dataset.hpp"

namespace invlab::metrics {

/// A categorical distribution: non-negative entries summing to 1 (1e-6).
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> p);
  std::span<const double> values() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }

 private:
  std::vector<double> p_;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// KL(p || q) in nats. Both arguments are clamped below at `floor` before
/// the logarithm. Throws on NaN or length mismatch.
double kl_divergence(std::span<const double> p, std::span<const double> q, double floor = kProbabilityFloor);
inline double kl_divergence(const ProbVector& p, const ProbVector& q) { return kl_divergence(p.values(), q.values()); }

/// Anything that maps images to class probabilities.
class ProbabilisticClassifier {
 public:
  virtual ~ProbabilisticClassifier() = default;
  virtual int num_classes() const = 0;
  /// Row-major (N x C) probabilities.
  virtual std::vector<double> predict_proba(std::span<const ImageView> images) const = 0;
};

/// Argmax predictions over a dataset, evaluated in batches.
std::vector<int> predict_labels(const ProbabilisticClassifier& classifier, const data::LabeledImageDataset& dataset,
                                std::size_t batch_size = 256);

// eKLD ---------------------------------------------------------------------------

struct EKLDOptions {
  int samples_per_input = 8;
  std::uint64_t seed = 0;
  std::size_t batch_size = 256;
};

struct EKLDReport {
  std::vector<std::optional<double>> per_class_ekld;  // nullopt: no inputs of that class
  std::vector<std::int64_t> per_class_counts;         // held-out inputs per class
  double overall_ekld = 0.0;                          // mean over all inputs
  std::vector<double> per_input_ekld;                 // in dataset order
  std::vector<int> input_labels;

  std::string transform;
  int samples_per_input = 0;
  std::uint64_t seed = 0;

  int num_classes() const { return static_cast<int>(per_class_ekld.size()); }

  /// class_index,class_size,ekld_nats,n_samples (missing entries are empty).
  /// class_size is the training size passed in, or empty when not given.
  void write_csv(std::ostream& os, std::span<const std::int64_t> class_sizes = {}) const;
  void write_csv(const std::filesystem::path& path, std::span<const std::int64_t> class_sizes = {}) const;
  nlohmann::json to_json() const;
  static EKLDReport from_json(const nlohmann::json& j);
};

/// For every input x, draws samples_per_input fresh x' ~ T(.|x) from the
/// stream derive_seed(seed, {id(x)}) and averages KL(P(.|x) || P(.|x')).
EKLDReport estimate_ekld(const ProbabilisticClassifier& classifier, const data::LabeledImageDataset& dataset,
                         const TransformSampler& transform, const EKLDOptions& options = {});

/// Mean of the report's per-class entries over the given classes, skipping
/// missing ones.
double mean_ekld_over(const EKLDReport& report, std::span<const int> classes);

/// Bootstrap standard error of the mean of `values`.
double bootstrap_standard_error(std::span<const double> values, int replicates, std::uint64_t seed);

// Accuracy -------------------------------------------------------------------------

struct ClassAccuracy {
  std::vector<std::optional<double>> per_class;
  std::vector<std::int64_t> counts;
};

ClassAccuracy per_class_accuracy(std::span<const int> predictions, std::span<const int> labels, int num_classes);

/// Unweighted mean of per-class accuracies. Throws if a class has no examples.
double balanced_accuracy(std::span<const int> predictions, std::span<const int> labels, int num_classes);
double balanced_accuracy(const ProbabilisticClassifier& classifier, const data::LabeledImageDataset& dataset);

// Rank statistics -------------------------------------------------------------------

/// 1-based ranks, ties receive the mean of the ranks they span.
std::vector<double> midranks(std::span<const double> values);

/// Pearson correlation of midranks. Returns 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Spearman correlation between class size and per-class eKLD over classes
/// that have an entry. Needs >= 3 such classes and not all sizes tied.
double ekld_trend_statistic(const EKLDReport& report, std::span<const std::int64_t> class_sizes);

}  // namespace invlab::metrics
