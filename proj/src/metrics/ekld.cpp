#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "invlab/metrics/metrics.hpp"

namespace invlab::metrics {

EKLDReport estimate_ekld(const ProbabilisticClassifier& classifier, const data::LabeledImageDataset& dataset,
                         const TransformSampler& transform, const EKLDOptions& options) {
  if (options.samples_per_input < 1) throw std::invalid_argument("estimate_ekld: samples_per_input must be >= 1");
  if (options.batch_size < 1) throw std::invalid_argument("estimate_ekld: batch_size must be >= 1");
  transform.check_shape(dataset.shape());
  const int num_classes = classifier.num_classes();
  const auto c = static_cast<std::size_t>(num_classes);
  if (num_classes != dataset.num_classes())
    throw std::invalid_argument("estimate_ekld: classifier and dataset disagree on the number of classes");

  EKLDReport r;
  r.transform = transform.name();
  r.samples_per_input = options.samples_per_input;
  r.seed = options.seed;
  r.per_input_ekld.assign(dataset.size(), 0.0);
  r.input_labels.assign(dataset.labels().begin(), dataset.labels().end());

  std::vector<ImageView> views;
  std::vector<Rng> rngs;
  for (std::size_t start = 0; start < dataset.size(); start += options.batch_size) {
    const std::size_t end = std::min(dataset.size(), start + options.batch_size);
    views.clear();
    rngs.clear();
    for (std::size_t i = start; i < end; ++i) {
      views.push_back(dataset.image(i));
      rngs.emplace_back(derive_seed(options.seed, {dataset.id(i)}));
    }
    const std::vector<double> p = classifier.predict_proba(views);
    for (int d = 0; d < options.samples_per_input; ++d) {
      const std::vector<Image> shifted = transform.sample_each(views, rngs);
      const std::vector<ImageView> shifted_views(shifted.begin(), shifted.end());
      const std::vector<double> q = classifier.predict_proba(shifted_views);
      for (std::size_t k = 0; k < views.size(); ++k) {
        const std::span<const double> pk(p.data() + k * c, c);
        const std::span<const double> qk(q.data() + k * c, c);
        r.per_input_ekld[start + k] += kl_divergence(pk, qk);
      }
    }
  }

  std::vector<double> sums(c, 0.0);
  r.per_class_counts.assign(c, 0);
  double total = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    r.per_input_ekld[i] /= options.samples_per_input;
    const auto y = static_cast<std::size_t>(dataset.label(i));
    sums.at(y) += r.per_input_ekld[i];
    ++r.per_class_counts[y];
    total += r.per_input_ekld[i];
  }
  r.per_class_ekld.assign(c, std::nullopt);
  for (std::size_t j = 0; j < c; ++j)
    if (r.per_class_counts[j] > 0) r.per_class_ekld[j] = sums[j] / static_cast<double>(r.per_class_counts[j]);
  r.overall_ekld = dataset.empty() ? 0.0 : total / static_cast<double>(dataset.size());
  return r;
}

double mean_ekld_over(const EKLDReport& report, std::span<const int> classes) {
  double s = 0.0;
  int n = 0;
  for (int j : classes)
    if (const auto& e = report.per_class_ekld.at(static_cast<std::size_t>(j))) {
      s += *e;
      ++n;
    }
  if (n == 0) throw std::invalid_argument("mean_ekld_over: no class has an entry");
  return s / n;
}

double bootstrap_standard_error(std::span<const double> values, int replicates, std::uint64_t seed) {
  if (values.empty() || replicates < 2) throw std::invalid_argument("bootstrap_standard_error: need data and >= 2 replicates");
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(replicates));
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) s += values[rng.below(values.size())];
    m = s / static_cast<double>(values.size());
  }
  double mu = 0.0;
  for (double m : means) mu += m;
  mu /= replicates;
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  return std::sqrt(var / (replicates - 1));
}

void EKLDReport::write_csv(std::ostream& os, std::span<const std::int64_t> class_sizes) const {
  os << "class_index,class_size,ekld_nats,n_samples\n" << std::setprecision(17);
  for (std::size_t j = 0; j < per_class_ekld.size(); ++j) {
    os << j << ',';
    if (j < class_sizes.size()) os << class_sizes[j];
    os << ',';
    if (per_class_ekld[j]) os << *per_class_ekld[j];
    os << ',' << per_class_counts[j] << '\n';
  }
}

void EKLDReport::write_csv(const std::filesystem::path& path, std::span<const std::int64_t> class_sizes) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_csv(os, class_sizes);
}

nlohmann::json EKLDReport::to_json() const {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& e : per_class_ekld) per_class.push_back(e ? nlohmann::json(*e) : nlohmann::json(nullptr));
  return {{"per_class_ekld", per_class},
          {"per_class_counts", per_class_counts},
          {"overall_ekld", overall_ekld},
          {"transform", transform},
          {"samples_per_input", samples_per_input},
          {"seed", seed},
          {"per_input_ekld", per_input_ekld},
          {"input_labels", input_labels}};
}

EKLDReport EKLDReport::from_json(const nlohmann::json& j) {
  EKLDReport r;
  for (const auto& e : j.at("per_class_ekld"))
    r.per_class_ekld.push_back(e.is_null() ? std::nullopt : std::optional<double>(e.get<double>()));
  r.per_class_counts = j.at("per_class_counts").get<std::vector<std::int64_t>>();
  r.overall_ekld = j.at("overall_ekld").get<double>();
  r.transform = j.value("transform", "");
  r.samples_per_input = j.value("samples_per_input", 0);
  r.seed = j.value("seed", std::uint64_t{0});
  r.per_input_ekld = j.value("per_input_ekld", std::vector<double>{});
  r.input_labels = j.value("input_labels", std::vector<int>{});
  return r;
}

}  // namespace invlab::metrics
