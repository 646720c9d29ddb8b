#include <cmath>
#include <stdexcept>

#include "invlab/miitn/miitn.hpp"

namespace invlab::miitn {

namespace nn = torch::nn;

torch::Tensor to_signed_tensor(std::span<const ImageView> images) {
  if (images.empty()) throw std::invalid_argument("to_signed_tensor: empty batch");
  const ImageShape s = images.front().shape();
  torch::Tensor hwc = torch::empty({static_cast<std::int64_t>(images.size()), s.height, s.width, s.channels},
                                   torch::kUInt8);
  auto* dst = hwc.data_ptr<std::uint8_t>();
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].shape() != s) throw std::invalid_argument("to_signed_tensor: mixed image shapes");
    std::copy(images[i].data().begin(), images[i].data().end(), dst + i * s.pixels());
  }
  return hwc.permute({0, 3, 1, 2}).to(torch::kFloat32).div_(127.5f).sub_(1.0f).contiguous();
}

std::vector<Image> from_signed_tensor(const torch::Tensor& x) {
  const torch::Tensor u8 = x.detach()
                               .add(1.0f)
                               .mul(127.5f)
                               .round()
                               .clamp(0.0, 255.0)
                               .to(torch::kUInt8)
                               .permute({0, 2, 3, 1})
                               .contiguous();
  const ImageShape s{static_cast<int>(u8.size(1)), static_cast<int>(u8.size(2)), static_cast<int>(u8.size(3))};
  std::vector<Image> out;
  const auto* p = u8.data_ptr<std::uint8_t>();
  for (std::int64_t i = 0; i < u8.size(0); ++i)
    out.emplace_back(s, std::vector<std::uint8_t>(p + i * static_cast<std::int64_t>(s.pixels()),
                                                  p + (i + 1) * static_cast<std::int64_t>(s.pixels())));
  return out;
}

namespace {

void kaiming_init(nn::Module& m) {
  for (auto& sub : m.modules(true)) {
    if (auto* conv = sub->as<nn::Conv2d>()) {
      nn::init::kaiming_normal_(conv->weight, 0.0, torch::kFanIn);
      if (conv->bias.defined()) nn::init::zeros_(conv->bias);
    }
    if (auto* lin = sub->as<nn::Linear>()) {
      nn::init::kaiming_normal_(lin->weight, 0.0, torch::kFanIn);
      nn::init::zeros_(lin->bias);
    }
  }
}

void gaussian_init(nn::Module& m) {
  for (auto& sub : m.modules(true))
    if (auto* conv = sub->as<nn::Conv2d>()) {
      nn::init::normal_(conv->weight, 0.0, 0.02);
      if (conv->bias.defined()) nn::init::zeros_(conv->bias);
    }
}

}  // namespace

MiitnModel::MiitnModel(ImageShape shape, Architecture arch, std::uint64_t init_seed) : shape_(shape), arch_(arch) {
  if (shape.channels < 1 || shape.height < 16 || shape.width < 16)
    throw std::invalid_argument("MIITN needs images of at least 16x16");
  torch::manual_seed(init_seed >> 1);
  gen_a = Generator(shape.channels, arch);
  gen_b = Generator(shape.channels, arch);
  dis_a = Discriminator(shape.channels, arch);
  dis_b = Discriminator(shape.channels, arch);
  kaiming_init(*gen_a);
  kaiming_init(*gen_b);
  gaussian_init(*dis_a);
  gaussian_init(*dis_b);
  train_mode(false);
}

void MiitnModel::train_mode(bool on) {
  gen_a->train(on);
  gen_b->train(on);
  dis_a->train(on);
  dis_b->train(on);
}

void MiitnModel::check_input(const ImageShape& s) const {
  if (s != shape_)
    throw std::invalid_argument("MIITN was trained on " + to_string(shape_) + " images, got " + to_string(s));
}

torch::Tensor MiitnModel::translate(const torch::Tensor& x, const torch::Tensor& style) const {
  return gen_b.ptr()->decode(gen_a.ptr()->content_encoder->forward(x), style);
}

torch::Tensor MiitnModel::reconstruct(const torch::Tensor& x) const {
  auto [content, style] = gen_a.ptr()->encode(x);
  return gen_a.ptr()->decode(content, style);
}

Image MiitnModel::sample_transform(ImageView x, Rng& rng) const {
  std::vector<float> z(static_cast<std::size_t>(arch_.style_dim));
  for (float& v : z) v = static_cast<float>(rng.normal());
  return sample_transform(x, z);
}

Image MiitnModel::sample_transform(ImageView x, std::span<const float> style) const {
  check_input(x.shape());
  if (style.size() != static_cast<std::size_t>(arch_.style_dim))
    throw std::invalid_argument("style code has the wrong dimension");
  torch::NoGradGuard no_grad;
  const torch::Tensor z = torch::tensor(std::vector<float>(style.begin(), style.end())).view({1, arch_.style_dim, 1, 1});
  const ImageView one[] = {x};
  return std::move(from_signed_tensor(translate(to_signed_tensor(one), z)).front());
}

Image MiitnModel::reconstruct(ImageView x) const {
  check_input(x.shape());
  torch::NoGradGuard no_grad;
  const ImageView one[] = {x};
  return std::move(from_signed_tensor(reconstruct(to_signed_tensor(one))).front());
}

void MiitnModel::save(const std::filesystem::path& path, std::int64_t step, torch::optim::Optimizer* gen_opt,
                      torch::optim::Optimizer* dis_opt) const {
  torch::serialize::OutputArchive ar;
  ar.write("format", c10::IValue(std::string(kFormat)));
  ar.write("shape", torch::tensor({static_cast<std::int64_t>(shape_.height), static_cast<std::int64_t>(shape_.width),
                                   static_cast<std::int64_t>(shape_.channels)}));
  ar.write("arch", torch::tensor({static_cast<std::int64_t>(arch_.dim), static_cast<std::int64_t>(arch_.style_dim),
                                  static_cast<std::int64_t>(arch_.n_downsample), static_cast<std::int64_t>(arch_.n_res),
                                  static_cast<std::int64_t>(arch_.mlp_dim), static_cast<std::int64_t>(arch_.dis_dim),
                                  static_cast<std::int64_t>(arch_.dis_layers)}));
  ar.write("step", torch::tensor(step));
  auto put = [&](const char* key, const nn::Module& m) {
    torch::serialize::OutputArchive sub;
    m.save(sub);
    ar.write(key, sub);
  };
  put("gen_a", *gen_a);
  put("gen_b", *gen_b);
  put("dis_a", *dis_a);
  put("dis_b", *dis_b);
  if (gen_opt != nullptr) {
    torch::serialize::OutputArchive sub;
    gen_opt->save(sub);
    ar.write("gen_opt", sub);
  }
  if (dis_opt != nullptr) {
    torch::serialize::OutputArchive sub;
    dis_opt->save(sub);
    ar.write("dis_opt", sub);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  ar.save_to(tmp.string());
  std::filesystem::rename(tmp, path);
}

namespace {

torch::serialize::InputArchive open_checkpoint(const std::filesystem::path& path) {
  torch::serialize::InputArchive ar;
  ar.load_from(path.string());
  c10::IValue format;
  if (!ar.try_read("format", format) || !format.isString() || format.toStringRef() != MiitnModel::kFormat)
    throw std::runtime_error(path.string() + " is not a MIITN checkpoint (" + MiitnModel::kFormat + ")");
  return ar;
}

}  // namespace

std::int64_t MiitnModel::load_state(const std::filesystem::path& path, torch::optim::Optimizer* gen_opt,
                                    torch::optim::Optimizer* dis_opt) {
  torch::serialize::InputArchive ar = open_checkpoint(path);
  auto get = [&](const char* key, nn::Module& m) {
    torch::serialize::InputArchive sub;
    ar.read(key, sub);
    m.load(sub);
  };
  get("gen_a", *gen_a);
  get("gen_b", *gen_b);
  get("dis_a", *dis_a);
  get("dis_b", *dis_b);
  if (gen_opt != nullptr) {
    torch::serialize::InputArchive sub;
    if (ar.try_read("gen_opt", sub)) gen_opt->load(sub);
  }
  if (dis_opt != nullptr) {
    torch::serialize::InputArchive sub;
    if (ar.try_read("dis_opt", sub)) dis_opt->load(sub);
  }
  torch::Tensor step;
  ar.read("step", step);
  return step.item<std::int64_t>();
}

MiitnModel MiitnModel::load(const std::filesystem::path& path, std::int64_t* step, torch::optim::Optimizer* gen_opt,
                            torch::optim::Optimizer* dis_opt) {
  torch::serialize::InputArchive ar = open_checkpoint(path);
  torch::Tensor shape_t, arch_t;
  ar.read("shape", shape_t);
  ar.read("arch", arch_t);
  auto at = [](const torch::Tensor& t, int i) { return static_cast<int>(t[i].item<std::int64_t>()); };
  const ImageShape shape{at(shape_t, 0), at(shape_t, 1), at(shape_t, 2)};
  const Architecture arch{at(arch_t, 0), at(arch_t, 1), at(arch_t, 2), at(arch_t, 3),
                          at(arch_t, 4), at(arch_t, 5), at(arch_t, 6)};
  MiitnModel m(shape, arch, 0);
  const std::int64_t s = m.load_state(path, gen_opt, dis_opt);
  if (step != nullptr) *step = s;
  return m;
}

Image MiitnGenerator::sample(ImageView x, Rng& rng) const { return model_->sample_transform(x, rng); }

std::vector<Image> MiitnGenerator::sample_each(std::span<const ImageView> xs, std::span<Rng> rngs) const {
  if (xs.size() != rngs.size()) throw std::invalid_argument("sample_each: one stream per input required");
  if (xs.empty()) return {};
  for (const ImageView& x : xs) check_shape(x.shape());
  const int d = model_->architecture().style_dim;
  std::vector<float> z(xs.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int k = 0; k < d; ++k) z[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)] = static_cast<float>(rngs[i].normal());
  torch::NoGradGuard no_grad;
  const torch::Tensor style = torch::tensor(z).view({static_cast<std::int64_t>(xs.size()), d, 1, 1});
  return from_signed_tensor(model_->translate(to_signed_tensor(xs), style));
}

void MiitnGenerator::check_shape(const ImageShape& shape) const {
  if (shape != model_->shape())
    throw std::invalid_argument("MIITN was trained on " + to_string(model_->shape()) + " images, got " +
                                to_string(shape));
}

}  // namespace invlab::miitn
