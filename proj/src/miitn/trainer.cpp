#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "invlab/core/log.hpp"
#include "invlab/miitn/miitn.hpp"

namespace invlab::miitn {

namespace {

torch::Tensor l1(const torch::Tensor& a, const torch::Tensor& b) { return torch::mean(torch::abs(a - b)); }

torch::Tensor style_noise(Rng& rng, int n, int dim) {
  std::vector<float> z(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim));
  for (float& v : z) v = static_cast<float>(rng.normal());
  return torch::tensor(z).view({n, dim, 1, 1});
}

/// Class-balanced draw: a class uniformly among non-empty ones, then a member.
class BalancedDraw {
 public:
  explicit BalancedDraw(const data::LabeledImageDataset& ds) : ds_(ds) {
    for (auto& members : ds.indices_by_class())
      if (!members.empty()) classes_.push_back(std::move(members));
    if (classes_.empty()) throw std::invalid_argument("train_miitn: empty dataset");
  }

  torch::Tensor operator()(Rng& rng, int n, bool flip) const {
    std::vector<Image> images;
    for (int k = 0; k < n; ++k) {
      const auto& members = classes_[rng.below(classes_.size())];
      Image img(ds_.image(members[rng.below(members.size())]));
      if (flip && rng.bernoulli(0.5)) {
        const ImageShape s = img.shape();
        for (int i = 0; i < s.height; ++i)
          for (int j = 0; j < s.width / 2; ++j)
            for (int c = 0; c < s.channels; ++c) std::swap(img.at(i, j, c), img.at(i, s.width - 1 - j, c));
      }
      images.push_back(std::move(img));
    }
    const std::vector<ImageView> views(images.begin(), images.end());
    return to_signed_tensor(views);
  }

 private:
  const data::LabeledImageDataset& ds_;
  std::vector<std::vector<std::size_t>> classes_;
};

std::filesystem::path curve_path(const std::filesystem::path& checkpoint) {
  return checkpoint.string() + ".curve.csv";
}

std::vector<StepLosses> read_curve_csv(const std::filesystem::path& path) {
  std::vector<StepLosses> curve;
  std::ifstream in(path);
  std::string line;
  if (!std::getline(in, line)) return curve;
  while (std::getline(in, line)) {
    std::istringstream is(line);
    StepLosses s;
    char comma = 0;
    is >> s.step >> comma >> s.adversarial >> comma >> s.image_recon >> comma >> s.style_recon >> comma >>
        s.content_recon >> comma >> s.discriminator;
    if (is) curve.push_back(s);
  }
  return curve;
}

}  // namespace

void write_curve_csv(const std::filesystem::path& path, const std::vector<StepLosses>& curve) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "step,adversarial,image_recon,style_recon,content_recon,discriminator\n" << std::setprecision(9);
  for (const auto& s : curve)
    os << s.step << ',' << s.adversarial << ',' << s.image_recon << ',' << s.style_recon << ',' << s.content_recon
       << ',' << s.discriminator << '\n';
}

TrainOutcome train_miitn(const data::LabeledImageDataset& dataset, const Architecture& arch,
                         const TrainOptions& options, std::uint64_t seed) {
  options.weights.validate();
  if (options.steps < 0) throw std::invalid_argument("train_miitn: steps must be >= 0");
  if (options.batch_size < 1) throw std::invalid_argument("train_miitn: batch_size must be >= 1");
  const BalancedDraw draw(dataset);

  auto model = std::make_shared<MiitnModel>(dataset.shape(), arch, derive_seed(seed, {stream_id("init")}));
  std::vector<torch::Tensor> gen_params = model->gen_a->parameters();
  for (auto& p : model->gen_b->parameters()) gen_params.push_back(p);
  std::vector<torch::Tensor> dis_params = model->dis_a->parameters();
  for (auto& p : model->dis_b->parameters()) dis_params.push_back(p);
  const auto adam = [&] {
    return torch::optim::AdamOptions(options.lr)
        .betas({options.beta1, options.beta2})
        .weight_decay(options.weight_decay);
  };
  torch::optim::Adam gen_opt(gen_params, adam());
  torch::optim::Adam dis_opt(dis_params, adam());

  TrainOutcome out{model, {}};
  std::int64_t start = 0;
  if (!options.checkpoint.empty() && std::filesystem::exists(options.checkpoint)) {
    start = model->load_state(options.checkpoint, &gen_opt, &dis_opt);
    out.curve = read_curve_csv(curve_path(options.checkpoint));
    std::erase_if(out.curve, [&](const StepLosses& s) { return s.step > start; });
    log::info("resuming MIITN training at step " + std::to_string(start));
  }

  const LossWeights& w = options.weights;
  const int n = options.batch_size;
  const int sd = arch.style_dim;
  StepLosses window;
  std::int64_t window_steps = 0;
  model->train_mode(true);

  auto checkpoint = [&](std::int64_t step) {
    if (options.checkpoint.empty()) return;
    model->save(options.checkpoint, step, &gen_opt, &dis_opt);
    write_curve_csv(curve_path(options.checkpoint), out.curve);
  };

  for (std::int64_t step = start; step < options.steps; ++step) {
    const double lr = options.lr * std::pow(0.5, static_cast<double>(step / options.lr_step_size));
    for (auto* opt : {&gen_opt, &dis_opt})
      for (auto& g : opt->param_groups()) static_cast<torch::optim::AdamOptions&>(g.options()).lr(lr);

    Rng rng(derive_seed(seed, {stream_id("step"), static_cast<std::uint64_t>(step)}));
    const torch::Tensor x_a = draw(rng, n, options.horizontal_flip);
    const torch::Tensor x_b = draw(rng, n, options.horizontal_flip);

    // discriminator update
    torch::Tensor x_ba, x_ab;
    {
      torch::NoGradGuard no_grad;
      const torch::Tensor s_a = style_noise(rng, n, sd);
      const torch::Tensor s_b = style_noise(rng, n, sd);
      x_ba = model->gen_a->decode(model->gen_b->content_encoder->forward(x_b), s_a);
      x_ab = model->gen_b->decode(model->gen_a->content_encoder->forward(x_a), s_b);
    }
    dis_opt.zero_grad();
    const torch::Tensor dis_loss =
        w.adversarial * (model->dis_a->discriminator_loss(x_ba, x_a) + model->dis_b->discriminator_loss(x_ab, x_b));
    dis_loss.backward();
    dis_opt.step();

    // generator update
    gen_opt.zero_grad();
    const torch::Tensor s_a = style_noise(rng, n, sd);
    const torch::Tensor s_b = style_noise(rng, n, sd);
    auto [c_a, s_a_prime] = model->gen_a->encode(x_a);
    auto [c_b, s_b_prime] = model->gen_b->encode(x_b);
    const torch::Tensor x_a_recon = model->gen_a->decode(c_a, s_a_prime);
    const torch::Tensor x_b_recon = model->gen_b->decode(c_b, s_b_prime);
    const torch::Tensor g_ba = model->gen_a->decode(c_b, s_a);
    const torch::Tensor g_ab = model->gen_b->decode(c_a, s_b);
    auto [c_b_recon, s_a_recon] = model->gen_a->encode(g_ba);
    auto [c_a_recon, s_b_recon] = model->gen_b->encode(g_ab);

    const torch::Tensor recon_x = l1(x_a_recon, x_a) + l1(x_b_recon, x_b);
    const torch::Tensor recon_s = l1(s_a_recon, s_a) + l1(s_b_recon, s_b);
    const torch::Tensor recon_c = l1(c_a_recon, c_a) + l1(c_b_recon, c_b);
    const torch::Tensor adv = model->dis_a->generator_loss(g_ba) + model->dis_b->generator_loss(g_ab);
    const torch::Tensor gen_loss =
        w.adversarial * adv + w.image_recon * recon_x + w.style_recon * recon_s + w.content_recon * recon_c;
    gen_loss.backward();
    gen_opt.step();

    const StepLosses now{step + 1,
                         adv.item<double>(),
                         recon_x.item<double>(),
                         recon_s.item<double>(),
                         recon_c.item<double>(),
                         dis_loss.item<double>()};
    for (double v : {now.adversarial, now.image_recon, now.style_recon, now.content_recon, now.discriminator})
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite MIITN loss at step " << now.step << ": adversarial " << now.adversarial << ", image "
            << now.image_recon << ", style " << now.style_recon << ", content " << now.content_recon
            << ", discriminator " << now.discriminator;
        throw std::runtime_error(msg.str());
      }
    window.adversarial += now.adversarial;
    window.image_recon += now.image_recon;
    window.style_recon += now.style_recon;
    window.content_recon += now.content_recon;
    window.discriminator += now.discriminator;
    ++window_steps;

    if (options.log_every > 0 && (step + 1) % options.log_every == 0) {
      const auto k = static_cast<double>(window_steps);
      const StepLosses mean{step + 1, window.adversarial / k, window.image_recon / k, window.style_recon / k,
                            window.content_recon / k, window.discriminator / k};
      out.curve.push_back(mean);
      window = {};
      window_steps = 0;
      std::ostringstream msg;
      msg << "miitn step " << mean.step << " adv " << mean.adversarial << " recon_x " << mean.image_recon
          << " recon_s " << mean.style_recon << " recon_c " << mean.content_recon << " dis " << mean.discriminator;
      log::debug(msg.str());
      if (options.on_log) options.on_log(mean);
    }
    if (options.checkpoint_every > 0 && (step + 1) % options.checkpoint_every == 0) checkpoint(step + 1);
  }
  if (start < options.steps || !std::filesystem::exists(options.checkpoint)) checkpoint(options.steps);
  model->train_mode(false);
  return out;
}

}  // namespace invlab::miitn
