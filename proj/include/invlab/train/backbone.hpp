#pragma once

#include <torch/torch.h>

#include <memory>
#include <string>

#include "invlab/core/image.hpp"

namespace invlab::train {

/// Common base of the classifier networks: (N, C, H, W) -> (N, classes).
class ClassifierNet : public torch::nn::Module {
 public:
  virtual torch::Tensor forward(torch::Tensor x) = 0;
};

struct BackboneSpec {
  std::string architecture = "simple_cnn";  // simple_cnn | resnet20 | resnet32
  int num_classes = 0;
  ImageShape input_shape;
  /// Channel width of the first stage.
  int width = 16;

  bool operator==(const BackboneSpec&) const = default;
};

/// simple_cnn: four (3x3 conv, batch norm, ReLU, 2x2 max pool) blocks with
/// doubling widths, then a linear head on the flattened features. resnet20/32: the CIFAR
/// residual family (3 stages, 16/32/64 channels, option-A shortcuts).
std::shared_ptr<ClassifierNet> build_backbone(const BackboneSpec& spec);

std::int64_t parameter_count(torch::nn::Module& module);

}  // namespace invlab::train
