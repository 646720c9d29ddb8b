#include "invlab/train/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace invlab::train {

torch::Tensor images_to_tensor(std::span<const ImageView> images) {
  if (images.empty()) throw std::invalid_argument("images_to_tensor: empty batch");
  const ImageShape s = images.front().shape();
  torch::Tensor hwc = torch::empty({static_cast<std::int64_t>(images.size()), s.height, s.width, s.channels},
                                   torch::kUInt8);
  auto* dst = hwc.data_ptr<std::uint8_t>();
  const std::size_t stride = s.pixels();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].shape() != s) throw std::invalid_argument("images_to_tensor: mixed image shapes");
    std::copy(images[i].data().begin(), images[i].data().end(), dst + i * stride);
  }
  return hwc.permute({0, 3, 1, 2}).to(torch::kFloat32).div_(255.0f).contiguous();
}

Normalization Normalization::identity(int channels) {
  return {std::vector<float>(static_cast<std::size_t>(channels), 0.0f),
          std::vector<float>(static_cast<std::size_t>(channels), 1.0f)};
}

Normalization Normalization::from_dataset(const data::LabeledImageDataset& dataset) {
  const int c = dataset.shape().channels;
  std::vector<double> sum(static_cast<std::size_t>(c), 0.0), sq(static_cast<std::size_t>(c), 0.0);
  const auto px = dataset.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double v = px[i] / 255.0;
    sum[i % static_cast<std::size_t>(c)] += v;
    sq[i % static_cast<std::size_t>(c)] += v * v;
  }
  const double n = static_cast<double>(px.size() / static_cast<std::size_t>(c));
  Normalization out;
  for (std::size_t k = 0; k < sum.size(); ++k) {
    const double mean = sum[k] / n;
    const double var = std::max(sq[k] / n - mean * mean, 0.0);
    out.mean.push_back(static_cast<float>(mean));
    out.stddev.push_back(static_cast<float>(std::max(std::sqrt(var), 1e-3)));
  }
  return out;
}

torch::Tensor Normalization::apply(const torch::Tensor& x01) const {
  const auto c = static_cast<std::int64_t>(mean.size());
  const torch::Tensor m = torch::tensor(mean).view({1, c, 1, 1});
  const torch::Tensor s = torch::tensor(stddev).view({1, c, 1, 1});
  return (x01 - m) / s;
}

TorchClassifier::TorchClassifier(BackboneSpec spec, Normalization normalization)
    : spec_(std::move(spec)), normalization_(std::move(normalization)), net_(build_backbone(spec_)) {
  if (normalization_.mean.size() != static_cast<std::size_t>(spec_.input_shape.channels))
    throw std::invalid_argument("normalization channel count differs from the backbone input");
}

torch::Tensor TorchClassifier::logits(const torch::Tensor& x01) const {
  return net_->forward(normalization_.apply(x01));
}

std::vector<double> TorchClassifier::predict_proba(std::span<const ImageView> images) const {
  if (images.empty()) return {};
  if (images.front().shape() != spec_.input_shape)
    throw std::invalid_argument("classifier expects " + to_string(spec_.input_shape) + " inputs, got " +
                                to_string(images.front().shape()));
  torch::NoGradGuard no_grad;
  const bool was_training = net_->is_training();
  net_->eval();
  const torch::Tensor p = torch::softmax(logits(images_to_tensor(images)), 1).to(torch::kFloat64).contiguous();
  if (was_training) net_->train();
  return {p.data_ptr<double>(), p.data_ptr<double>() + p.numel()};
}

void TorchClassifier::save(const std::filesystem::path& path) const {
  torch::serialize::OutputArchive archive;
  archive.write("format", c10::IValue(std::string(kFormat)));
  archive.write("architecture", c10::IValue(spec_.architecture));
  archive.write("spec", torch::tensor(std::vector<std::int64_t>{spec_.num_classes, spec_.input_shape.height,
                                                                spec_.input_shape.width, spec_.input_shape.channels,
                                                                spec_.width}));
  archive.write("norm_mean", torch::tensor(normalization_.mean));
  archive.write("norm_std", torch::tensor(normalization_.stddev));
  torch::serialize::OutputArchive net;
  net_->save(net);
  archive.write("net", net);
  archive.save_to(path.string());
}

TorchClassifier TorchClassifier::load(const std::filesystem::path& path) {
  torch::serialize::InputArchive archive;
  archive.load_from(path.string());
  c10::IValue format, arch;
  if (!archive.try_read("format", format) || !format.isString() || format.toStringRef() != kFormat)
    throw std::runtime_error(path.string() + " is not a classifier checkpoint (" + kFormat + ")");
  archive.read("architecture", arch);
  torch::Tensor spec_t, mean_t, std_t;
  archive.read("spec", spec_t);
  archive.read("norm_mean", mean_t);
  archive.read("norm_std", std_t);
  BackboneSpec spec;
  spec.architecture = arch.toStringRef();
  spec.num_classes = static_cast<int>(spec_t[0].item<std::int64_t>());
  spec.input_shape = {static_cast<int>(spec_t[1].item<std::int64_t>()), static_cast<int>(spec_t[2].item<std::int64_t>()),
                      static_cast<int>(spec_t[3].item<std::int64_t>())};
  spec.width = static_cast<int>(spec_t[4].item<std::int64_t>());
  mean_t = mean_t.contiguous();
  std_t = std_t.contiguous();
  Normalization norm{{mean_t.data_ptr<float>(), mean_t.data_ptr<float>() + mean_t.numel()},
                     {std_t.data_ptr<float>(), std_t.data_ptr<float>() + std_t.numel()}};
  TorchClassifier c(spec, norm);
  torch::serialize::InputArchive net;
  archive.read("net", net);
  c.net_->load(net);
  return c;
}

}  // namespace invlab::train
