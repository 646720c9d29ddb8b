#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "invlab/core/sampler.hpp"
#include "invlab/data/dataset.hpp"

namespace invlab::miitn {

/// Channel counts and depths of the translation network.
struct Architecture {
  int dim = 16;          // first encoder width
  int style_dim = 8;
  int n_downsample = 2;  // content encoder / decoder
  int n_res = 2;         // residual blocks in content encoder and decoder
  int mlp_dim = 64;      // style -> AdaIN parameter MLP width
  int dis_dim = 16;
  int dis_layers = 3;

  /// "desk" (reduced widths) or "full" (the reference widths).
  static Architecture preset(const std::string& name);
  bool operator==(const Architecture&) const = default;
};

struct LossWeights {
  double image_recon = 10.0;
  double adversarial = 1.0;
  double style_recon = 1.0;
  double content_recon = 1.0;
  double perceptual = 0.0;  // the perceptual term is not implemented and must stay 0

  void validate() const;
};

// Networks -------------------------------------------------------------------------

/// Instance-normalized content encoder: image -> spatial content code.
class ContentEncoderImpl : public torch::nn::Module {
 public:
  ContentEncoderImpl(int in_channels, const Architecture& a);
  torch::Tensor forward(const torch::Tensor& x);
  int output_dim() const { return output_dim_; }

 private:
  torch::nn::Sequential body_;
  int output_dim_;
};
TORCH_MODULE(ContentEncoder);

/// Unnormalized style encoder: image -> (N, style_dim, 1, 1).
class StyleEncoderImpl : public torch::nn::Module {
 public:
  StyleEncoderImpl(int in_channels, const Architecture& a);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential body_;
};
TORCH_MODULE(StyleEncoder);

/// Decoder whose residual blocks use adaptive instance norm driven by an MLP
/// of the style code.
class DecoderImpl : public torch::nn::Module {
 public:
  DecoderImpl(int content_dim, int out_channels, const Architecture& a);
  torch::Tensor forward(const torch::Tensor& content, const torch::Tensor& style);
  std::int64_t adain_parameter_count() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};
TORCH_MODULE(Decoder);

class GeneratorImpl : public torch::nn::Module {
 public:
  GeneratorImpl(int channels, const Architecture& a);
  /// (content, style)
  std::pair<torch::Tensor, torch::Tensor> encode(const torch::Tensor& x);
  torch::Tensor decode(const torch::Tensor& content, const torch::Tensor& style);

  ContentEncoder content_encoder{nullptr};
  StyleEncoder style_encoder{nullptr};
  Decoder decoder{nullptr};
};
TORCH_MODULE(Generator);

/// Single-scale patch discriminator with a least-squares objective.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  DiscriminatorImpl(int channels, const Architecture& a);
  torch::Tensor forward(const torch::Tensor& x);
  torch::Tensor discriminator_loss(const torch::Tensor& fake, const torch::Tensor& real);
  torch::Tensor generator_loss(const torch::Tensor& fake);

 private:
  torch::nn::Sequential body_;
};
TORCH_MODULE(Discriminator);

// Model --------------------------------------------------------------------------------

/// Both translation directions of the single-dataset setup. The learned
/// transform uses the content encoder of `gen_a` and the decoder of `gen_b`.
class MiitnModel {
 public:
  static constexpr const char* kFormat = "invlab.miitn.v1";

  MiitnModel(ImageShape shape, Architecture arch, std::uint64_t init_seed);

  const ImageShape& shape() const { return shape_; }
  const Architecture& architecture() const { return arch_; }

  Generator gen_a{nullptr}, gen_b{nullptr};
  Discriminator dis_a{nullptr}, dis_b{nullptr};

  void train_mode(bool on);

  /// Images in [-1, 1] -> translated images with the given style codes.
  torch::Tensor translate(const torch::Tensor& x, const torch::Tensor& style) const;
  /// decoder(content(x), style(x)) within one generator.
  torch::Tensor reconstruct(const torch::Tensor& x) const;

  /// Draws z ~ N(0, I) from `rng` and returns decode(content(x), z).
  Image sample_transform(ImageView x, Rng& rng) const;
  /// Same as sample_transform with a given style code.
  Image sample_transform(ImageView x, std::span<const float> style) const;
  Image reconstruct(ImageView x) const;

  /// Writes the four networks plus the optional optimizer states.
  void save(const std::filesystem::path& path, std::int64_t step = 0,
            torch::optim::Optimizer* gen_opt = nullptr, torch::optim::Optimizer* dis_opt = nullptr) const;
  /// Reads a checkpoint; returns its step and fills optimizer states when given.
  static MiitnModel load(const std::filesystem::path& path, std::int64_t* step = nullptr,
                         torch::optim::Optimizer* gen_opt = nullptr, torch::optim::Optimizer* dis_opt = nullptr);
  /// Loads only the states into an already constructed model.
  std::int64_t load_state(const std::filesystem::path& path, torch::optim::Optimizer* gen_opt,
                          torch::optim::Optimizer* dis_opt);

 private:
  void check_input(const ImageShape& s) const;

  ImageShape shape_;
  Architecture arch_;
};

/// uint8 images -> (N, C, H, W) in [-1, 1], and back (rounded, clamped).
torch::Tensor to_signed_tensor(std::span<const ImageView> images);
std::vector<Image> from_signed_tensor(const torch::Tensor& x);

// Training -----------------------------------------------------------------------------

struct StepLosses {
  std::int64_t step = 0;
  double adversarial = 0.0;
  double image_recon = 0.0;
  double style_recon = 0.0;
  double content_recon = 0.0;
  double discriminator = 0.0;
};

struct TrainOptions {
  std::int64_t steps = 10000;
  LossWeights weights;
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double weight_decay = 1e-4;
  /// Learning rate halves every lr_step_size steps.
  std::int64_t lr_step_size = 100000;
  int batch_size = 1;
  bool horizontal_flip = true;
  std::int64_t log_every = 100;
  std::int64_t checkpoint_every = 1000;
  /// When set, checkpoints go here and an existing checkpoint is resumed.
  std::filesystem::path checkpoint;
  std::function<void(const StepLosses&)> on_log;
};

struct TrainOutcome {
  std::shared_ptr<MiitnModel> model;
  /// Means of each component over every log_every window.
  std::vector<StepLosses> curve;
};

/// Alternating discriminator / generator updates on class-balanced draws of
/// `dataset` (both domains are the same dataset). Throws on a non-finite loss.
TrainOutcome train_miitn(const data::LabeledImageDataset& dataset, const Architecture& arch,
                         const TrainOptions& options, std::uint64_t seed);

void write_curve_csv(const std::filesystem::path& path, const std::vector<StepLosses>& curve);

// Sampler adapter -------------------------------------------------------------------

/// A trained model used as T(.|x).
class MiitnGenerator final : public TransformSampler {
 public:
  explicit MiitnGenerator(std::shared_ptr<const MiitnModel> model) : model_(std::move(model)) {}

  Image sample(ImageView x, Rng& rng) const override;
  std::vector<Image> sample_each(std::span<const ImageView> xs, std::span<Rng> rngs) const override;
  void check_shape(const ImageShape& shape) const override;
  std::string name() const override { return "miitn"; }

 private:
  std::shared_ptr<const MiitnModel> model_;
};

}  // namespace invlab::miitn
