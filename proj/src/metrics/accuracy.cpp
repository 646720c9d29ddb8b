#include <stdexcept>

#include "invlab/metrics/metrics.hpp"

namespace invlab::metrics {

ClassAccuracy per_class_accuracy(std::span<const int> predictions, std::span<const int> labels, int num_classes) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("per_class_accuracy: length mismatch");
  const auto c = static_cast<std::size_t>(num_classes);
  std::vector<std::int64_t> hits(c, 0);
  ClassAccuracy a;
  a.counts.assign(c, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    ++a.counts.at(y);
    if (predictions[i] == labels[i]) ++hits[y];
  }
  a.per_class.assign(c, std::nullopt);
  for (std::size_t j = 0; j < c; ++j)
    if (a.counts[j] > 0) a.per_class[j] = static_cast<double>(hits[j]) / static_cast<double>(a.counts[j]);
  return a;
}

double balanced_accuracy(std::span<const int> predictions, std::span<const int> labels, int num_classes) {
  const ClassAccuracy a = per_class_accuracy(predictions, labels, num_classes);
  double s = 0.0;
  for (std::size_t j = 0; j < a.per_class.size(); ++j) {
    if (!a.per_class[j]) throw std::invalid_argument("balanced_accuracy: class " + std::to_string(j) + " has no examples");
    s += *a.per_class[j];
  }
  return s / static_cast<double>(a.per_class.size());
}

double balanced_accuracy(const ProbabilisticClassifier& classifier, const data::LabeledImageDataset& dataset) {
  const std::vector<int> pred = predict_labels(classifier, dataset);
  return balanced_accuracy(pred, dataset.labels(), classifier.num_classes());
}

}  // namespace invlab::metrics
