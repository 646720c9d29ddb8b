#pragma once

#include <torch/torch.h>

#include <optional>
#include <span>

#include "invlab/strategies/strategies.hpp"

namespace invlab::strategies {

/// Per-example losses, shape (N,), for logits (N, C) and int64 targets (N,).
torch::Tensor cross_entropy_per_example(const torch::Tensor& logits, const torch::Tensor& targets);
torch::Tensor focal_per_example(const torch::Tensor& logits, const torch::Tensor& targets, double gamma);
torch::Tensor ldam_per_example(const torch::Tensor& logits, const torch::Tensor& targets,
                               const torch::Tensor& margins, double scale);

/// The configured loss over class sizes fixed at construction.
class StrategyLoss {
 public:
  StrategyLoss(const StrategyConfig& config, std::span<const std::int64_t> class_sizes);

  /// mean_i w[y_i] * loss_i, with w = 1 when no weights are given.
  torch::Tensor operator()(const torch::Tensor& logits, const torch::Tensor& targets,
                           const std::optional<ClassWeights>& weights = std::nullopt) const;

 private:
  StrategyConfig config_;
  torch::Tensor margins_;
};

}  // namespace invlab::strategies
