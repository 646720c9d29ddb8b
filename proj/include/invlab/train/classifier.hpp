#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "invlab/data/dataset.hpp"
#include "invlab/metrics/metrics.hpp"
#include "invlab/train/backbone.hpp"

namespace invlab::train {

/// (N, C, H, W) float tensor with values in [0, 1].
torch::Tensor images_to_tensor(std::span<const ImageView> images);

/// Per-channel statistics of the training pixels (on the [0, 1] scale).
struct Normalization {
  std::vector<float> mean;
  std::vector<float> stddev;

  static Normalization identity(int channels);
  static Normalization from_dataset(const data::LabeledImageDataset& dataset);
  torch::Tensor apply(const torch::Tensor& x01) const;
};

/// A backbone plus its input normalization.
class TorchClassifier final : public metrics::ProbabilisticClassifier {
 public:
  static constexpr const char* kFormat = "invlab.classifier.v1";

  TorchClassifier(BackboneSpec spec, Normalization normalization);

  const BackboneSpec& spec() const { return spec_; }
  const Normalization& normalization() const { return normalization_; }
  ClassifierNet& net() const { return *net_; }

  /// Logits for [0, 1] inputs; uses the network's current train/eval mode.
  torch::Tensor logits(const torch::Tensor& x01) const;

  int num_classes() const override { return spec_.num_classes; }
  /// Evaluation mode, no gradients.
  std::vector<double> predict_proba(std::span<const ImageView> images) const override;

  void save(const std::filesystem::path& path) const;
  static TorchClassifier load(const std::filesystem::path& path);

 private:
  BackboneSpec spec_;
  Normalization normalization_;
  std::shared_ptr<ClassifierNet> net_;
};

}  // namespace invlab::train
