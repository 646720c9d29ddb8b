#include "invlab/strategies/losses_torch.hpp"

namespace invlab::strategies {

namespace F = torch::nn::functional;

namespace {

torch::Tensor true_class_log_prob(const torch::Tensor& logits, const torch::Tensor& targets) {
  return F::log_softmax(logits, F::LogSoftmaxFuncOptions(1)).gather(1, targets.unsqueeze(1)).squeeze(1);
}

}  // namespace

torch::Tensor cross_entropy_per_example(const torch::Tensor& logits, const torch::Tensor& targets) {
  return -true_class_log_prob(logits, targets);
}

torch::Tensor focal_per_example(const torch::Tensor& logits, const torch::Tensor& targets, double gamma) {
  const torch::Tensor logp = true_class_log_prob(logits, targets);
  if (gamma == 0.0) return -logp;
  return -torch::pow(-torch::expm1(logp), gamma) * logp;
}

torch::Tensor ldam_per_example(const torch::Tensor& logits, const torch::Tensor& targets,
                               const torch::Tensor& margins, double scale) {
  const torch::Tensor onehot = F::one_hot(targets, logits.size(1)).to(logits.dtype());
  const torch::Tensor shifted = logits - onehot * margins.to(logits.dtype()).index_select(0, targets).unsqueeze(1);
  return cross_entropy_per_example(scale * shifted, targets);
}

StrategyLoss::StrategyLoss(const StrategyConfig& config, std::span<const std::int64_t> class_sizes)
    : config_(config) {
  if (config.loss == LossKind::ldam) {
    const std::vector<double> m = ldam_margins(class_sizes, config.max_margin);
    margins_ = torch::tensor(m, torch::kFloat64);
  }
}

torch::Tensor StrategyLoss::operator()(const torch::Tensor& logits, const torch::Tensor& targets,
                                       const std::optional<ClassWeights>& weights) const {
  torch::Tensor per;
  switch (config_.loss) {
    case LossKind::ce: per = cross_entropy_per_example(logits, targets); break;
    case LossKind::focal: per = focal_per_example(logits, targets, config_.gamma); break;
    case LossKind::ldam: per = ldam_per_example(logits, targets, margins_, config_.scale); break;
  }
  if (weights) {
    const torch::Tensor w = torch::tensor(weights->weights, torch::kFloat64).to(per.dtype());
    per = per * w.index_select(0, targets);
  }
  return per.mean();
}

}  // namespace invlab::strategies
