#include <stdexcept>

#include "invlab/miitn/miitn.hpp"

namespace invlab::miitn {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

Architecture Architecture::preset(const std::string& name) {
  if (name == "desk") return {};
  if (name == "full") return {64, 8, 2, 4, 256, 64, 4};
  throw std::invalid_argument("unknown MIITN preset '" + name + "' (desk|full)");
}

void LossWeights::validate() const {
  for (double w : {image_recon, adversarial, style_recon, content_recon})
    if (!(w >= 0.0)) throw std::invalid_argument("MIITN loss weights must be >= 0");
  if (perceptual != 0.0) throw std::invalid_argument("the perceptual loss is disabled; its weight must be 0");
}

namespace {

enum class Norm { none, instance, layer };
enum class Act { none, relu, lrelu, tanh };

/// Per-sample normalization over (C, H, W) with a per-channel affine.
class LayerNormImpl : public nn::Module {
 public:
  explicit LayerNormImpl(int channels) {
    gamma_ = register_parameter("gamma", torch::rand({channels}));
    beta_ = register_parameter("beta", torch::zeros({channels}));
  }
  torch::Tensor forward(const torch::Tensor& x) {
    const auto n = x.size(0);
    const torch::Tensor flat = x.reshape({n, -1});
    const torch::Tensor mean = flat.mean(1).view({n, 1, 1, 1});
    const torch::Tensor std = flat.std(1).view({n, 1, 1, 1});
    const torch::Tensor y = (x - mean) / (std + 1e-5);
    return y * gamma_.view({1, -1, 1, 1}) + beta_.view({1, -1, 1, 1});
  }

 private:
  torch::Tensor gamma_, beta_;
};
TORCH_MODULE(LayerNorm);

/// reflect pad -> conv -> norm -> activation
class ConvBlockImpl : public nn::Module {
 public:
  explicit ConvBlockImpl(nn::Sequential body) : body_(register_module("body", std::move(body))) {}
  torch::Tensor forward(const torch::Tensor& x) { return body_->forward(x); }

 private:
  nn::Sequential body_;
};
TORCH_MODULE(ConvBlock);

ConvBlock conv_block(int in, int out, int k, int stride, int pad, Norm norm, Act act) {
  nn::Sequential s;
  if (pad > 0) s->push_back(nn::ReflectionPad2d(nn::ReflectionPad2dOptions(pad)));
  s->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride)));
  if (norm == Norm::instance) s->push_back(nn::InstanceNorm2d(nn::InstanceNorm2dOptions(out)));
  if (norm == Norm::layer) s->push_back(LayerNorm(out));
  if (act == Act::relu) s->push_back(nn::ReLU());
  if (act == Act::lrelu) s->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
  if (act == Act::tanh) s->push_back(nn::Tanh());
  return ConvBlock(s);
}

class ResBlockImpl : public nn::Module {
 public:
  explicit ResBlockImpl(int dim)
      : a_(conv_block(dim, dim, 3, 1, 1, Norm::instance, Act::relu)),
        b_(conv_block(dim, dim, 3, 1, 1, Norm::instance, Act::none)) {
    register_module("a", a_);
    register_module("b", b_);
  }
  torch::Tensor forward(const torch::Tensor& x) { return x + b_->forward(a_->forward(x)); }

 private:
  ConvBlock a_, b_;
};
TORCH_MODULE(ResBlock);

/// Instance normalization with externally supplied (N, C) scale and shift.
torch::Tensor adain(const torch::Tensor& x, const torch::Tensor& scale, const torch::Tensor& shift) {
  const torch::Tensor mean = x.mean({2, 3}, true);
  const torch::Tensor var = x.var({2, 3}, false, true);
  const torch::Tensor y = (x - mean) / torch::sqrt(var + 1e-5);
  return y * scale.unsqueeze(2).unsqueeze(3) + shift.unsqueeze(2).unsqueeze(3);
}

}  // namespace

ContentEncoderImpl::ContentEncoderImpl(int in_channels, const Architecture& a) {
  int dim = a.dim;
  body_->push_back(conv_block(in_channels, dim, 7, 1, 3, Norm::instance, Act::relu));
  for (int i = 0; i < a.n_downsample; ++i) {
    body_->push_back(conv_block(dim, 2 * dim, 4, 2, 1, Norm::instance, Act::relu));
    dim *= 2;
  }
  for (int i = 0; i < a.n_res; ++i) body_->push_back(ResBlock(dim));
  output_dim_ = dim;
  register_module("body", body_);
}

torch::Tensor ContentEncoderImpl::forward(const torch::Tensor& x) { return body_->forward(x); }

StyleEncoderImpl::StyleEncoderImpl(int in_channels, const Architecture& a) {
  constexpr int kDownsample = 4;
  int dim = a.dim;
  body_->push_back(conv_block(in_channels, dim, 7, 1, 3, Norm::none, Act::relu));
  for (int i = 0; i < 2; ++i) {
    body_->push_back(conv_block(dim, 2 * dim, 4, 2, 1, Norm::none, Act::relu));
    dim *= 2;
  }
  for (int i = 0; i < kDownsample - 2; ++i) body_->push_back(conv_block(dim, dim, 4, 2, 1, Norm::none, Act::relu));
  body_->push_back(nn::AdaptiveAvgPool2d(nn::AdaptiveAvgPool2dOptions(1)));
  body_->push_back(nn::Conv2d(nn::Conv2dOptions(dim, a.style_dim, 1)));
  register_module("body", body_);
}

torch::Tensor StyleEncoderImpl::forward(const torch::Tensor& x) { return body_->forward(x); }

struct DecoderImpl::Impl {
  std::vector<std::pair<ConvBlock, ConvBlock>> res;  // (pad+conv) pairs, AdaIN applied between
  nn::Sequential up;
  nn::Sequential mlp;
  int dim = 0;
};

DecoderImpl::DecoderImpl(int content_dim, int out_channels, const Architecture& a) : impl_(std::make_shared<Impl>()) {
  int dim = content_dim;
  impl_->dim = dim;
  for (int i = 0; i < a.n_res; ++i) {
    auto c1 = conv_block(dim, dim, 3, 1, 1, Norm::none, Act::none);
    auto c2 = conv_block(dim, dim, 3, 1, 1, Norm::none, Act::none);
    register_module("res" + std::to_string(i) + "a", c1);
    register_module("res" + std::to_string(i) + "b", c2);
    impl_->res.emplace_back(c1, c2);
  }
  for (int i = 0; i < a.n_downsample; ++i) {
    impl_->up->push_back(nn::Upsample(nn::UpsampleOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest)));
    impl_->up->push_back(conv_block(dim, dim / 2, 5, 1, 2, Norm::layer, Act::relu));
    dim /= 2;
  }
  impl_->up->push_back(conv_block(dim, out_channels, 7, 1, 3, Norm::none, Act::tanh));
  register_module("up", impl_->up);

  const auto adain_params = adain_parameter_count();
  impl_->mlp->push_back(nn::Linear(a.style_dim, a.mlp_dim));
  impl_->mlp->push_back(nn::ReLU());
  impl_->mlp->push_back(nn::Linear(a.mlp_dim, a.mlp_dim));
  impl_->mlp->push_back(nn::ReLU());
  impl_->mlp->push_back(nn::Linear(a.mlp_dim, adain_params));
  register_module("mlp", impl_->mlp);
}

std::int64_t DecoderImpl::adain_parameter_count() const {
  return static_cast<std::int64_t>(impl_->res.size()) * 2 * 2 * impl_->dim;
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& content, const torch::Tensor& style) {
  const torch::Tensor params = impl_->mlp->forward(style.flatten(1));
  const std::int64_t d = impl_->dim;
  std::int64_t off = 0;
  // each AdaIN layer takes [shift | scale] from consecutive slices
  auto next = [&] {
    const torch::Tensor shift = params.narrow(1, off, d);
    const torch::Tensor scale = params.narrow(1, off + d, d);
    off += 2 * d;
    return std::pair{scale, shift};
  };
  torch::Tensor x = content;
  for (auto& [c1, c2] : impl_->res) {
    auto [s1, b1] = next();
    torch::Tensor h = torch::relu(adain(c1->forward(x), s1, b1));
    auto [s2, b2] = next();
    h = adain(c2->forward(h), s2, b2);
    x = x + h;
  }
  return impl_->up->forward(x);
}

GeneratorImpl::GeneratorImpl(int channels, const Architecture& a) {
  content_encoder = register_module("content_encoder", ContentEncoder(channels, a));
  style_encoder = register_module("style_encoder", StyleEncoder(channels, a));
  decoder = register_module("decoder", Decoder(content_encoder->output_dim(), channels, a));
}

std::pair<torch::Tensor, torch::Tensor> GeneratorImpl::encode(const torch::Tensor& x) {
  return {content_encoder->forward(x), style_encoder->forward(x)};
}

torch::Tensor GeneratorImpl::decode(const torch::Tensor& content, const torch::Tensor& style) {
  return decoder->forward(content, style);
}

DiscriminatorImpl::DiscriminatorImpl(int channels, const Architecture& a) {
  int dim = a.dis_dim;
  body_->push_back(conv_block(channels, dim, 4, 2, 1, Norm::none, Act::lrelu));
  for (int i = 0; i < a.dis_layers - 1; ++i) {
    body_->push_back(conv_block(dim, 2 * dim, 4, 2, 1, Norm::none, Act::lrelu));
    dim *= 2;
  }
  body_->push_back(nn::Conv2d(nn::Conv2dOptions(dim, 1, 1)));
  register_module("body", body_);
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& x) { return body_->forward(x); }

torch::Tensor DiscriminatorImpl::discriminator_loss(const torch::Tensor& fake, const torch::Tensor& real) {
  return torch::mean(torch::square(forward(fake))) + torch::mean(torch::square(forward(real) - 1));
}

torch::Tensor DiscriminatorImpl::generator_loss(const torch::Tensor& fake) {
  return torch::mean(torch::square(forward(fake) - 1));
}

}  // namespace invlab::miitn
