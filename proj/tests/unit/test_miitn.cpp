#include <gtest/gtest.h>
#include <torch/torch.h>

#include "helpers.hpp"
#include "invlab/miitn/miitn.hpp"

using namespace invlab;
using namespace invlab::miitn;

namespace {

constexpr ImageShape kShape{28, 28, 1};

data::LabeledImageDataset few_glyphs(std::size_t n) {
  Rng rng(3);
  data::LabeledImageDataset ds(kShape, 2);
  for (std::size_t i = 0; i < n; ++i) {
    // Bright squares of varying size on a dark background.
    Image x(kShape, 0);
    const int half = 3 + static_cast<int>(rng.below(8));
    for (int r = 14 - half; r < 14 + half; ++r)
      for (int c = 14 - half; c < 14 + half; ++c) x.at(r, c) = 230;
    ds.add(x, static_cast<int>(i % 2));
  }
  return ds;
}

double mean_recon_error(const MiitnModel& m, const data::LabeledImageDataset& ds) {
  double s = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Image r = m.reconstruct(ds.image(i));
    for (std::size_t k = 0; k < r.data().size(); ++k) s += std::abs(r.data()[k] - ds.image(i).data()[k]);
  }
  return s / static_cast<double>(ds.size() * kShape.pixels());
}

}  // namespace

TEST(Miitn, SignedTensorRoundTrip) {
  Rng rng(1);
  std::vector<Image> imgs{testutil::random_image(kShape, rng), testutil::random_image(kShape, rng)};
  const std::vector<ImageView> v(imgs.begin(), imgs.end());
  const auto t = to_signed_tensor(v);
  EXPECT_EQ(t.sizes(), (std::vector<std::int64_t>{2, 1, 28, 28}));
  EXPECT_GE(t.min().item<float>(), -1.0f);
  EXPECT_LE(t.max().item<float>(), 1.0f);
  EXPECT_EQ(from_signed_tensor(t), imgs);
}

TEST(Miitn, NetworkShapes) {
  const auto arch = Architecture::preset("desk");
  MiitnModel m(kShape, arch, 1);
  const auto x = torch::rand({3, 1, 28, 28}) * 2 - 1;
  const auto [content, style] = m.gen_a->encode(x);
  EXPECT_EQ(content.size(0), 3);
  EXPECT_EQ(content.size(1), m.gen_a->content_encoder->output_dim());
  EXPECT_EQ(content.size(2), 7);  // two stride-2 downsamplings
  EXPECT_EQ(style.sizes(), (std::vector<std::int64_t>{3, arch.style_dim, 1, 1}));
  EXPECT_EQ(m.translate(x, style).sizes(), x.sizes());
  EXPECT_EQ(m.dis_a->forward(x).size(0), 3);
  EXPECT_THROW(Architecture::preset("huge"), std::invalid_argument);
}

TEST(Miitn, SamplingIsSeededAndStyleDependent) {
  MiitnModel m(kShape, Architecture::preset("desk"), 2);
  m.train_mode(false);
  Rng g(4);
  const Image x = testutil::random_image(kShape, g);
  Rng a(7), b(7);
  EXPECT_EQ(m.sample_transform(x, a), m.sample_transform(x, b));
  Rng other = b.split("other");
  EXPECT_NE(m.sample_transform(x, a), m.sample_transform(x, other));
  const std::vector<float> zero(8, 0.0f), one(8, 1.0f);
  EXPECT_NE(m.sample_transform(x, zero), m.sample_transform(x, one));
  EXPECT_THROW(m.sample_transform(Image({32, 32, 3}, 0), zero), std::invalid_argument);
}

TEST(Miitn, SameInitSeedSameWeights) {
  MiitnModel a(kShape, Architecture::preset("desk"), 11), b(kShape, Architecture::preset("desk"), 11),
      c(kShape, Architecture::preset("desk"), 12);
  a.train_mode(false);
  b.train_mode(false);
  c.train_mode(false);
  const Image x(kShape, 90);
  EXPECT_EQ(a.reconstruct(x), b.reconstruct(x));
  EXPECT_NE(a.reconstruct(x), c.reconstruct(x));
}

TEST(Miitn, CheckpointRoundTrip) {
  testutil::TempDir dir("miitn");
  MiitnModel m(kShape, Architecture::preset("desk"), 3);
  m.train_mode(false);
  m.save(dir.path() / "m.pt", 42);
  std::int64_t step = 0;
  const MiitnModel back = MiitnModel::load(dir.path() / "m.pt", &step);
  EXPECT_EQ(step, 42);
  EXPECT_EQ(back.architecture(), m.architecture());
  EXPECT_EQ(back.shape(), kShape);
  const std::vector<float> z{0.1f, -0.2f, 0.3f, 0.0f, 1.0f, -1.0f, 0.5f, 0.25f};
  const Image x(kShape, 17);
  EXPECT_EQ(back.sample_transform(x, z), m.sample_transform(x, z));
}

TEST(Miitn, ZeroStepsTrainsNothing) {
  const auto ds = few_glyphs(4);
  TrainOptions opt;
  opt.steps = 0;
  const auto out = train_miitn(ds, Architecture::preset("desk"), opt, 5);
  EXPECT_TRUE(out.curve.empty());
  ASSERT_TRUE(out.model);
}

TEST(Miitn, ShortTrainingReducesReconstructionError) {
  const auto ds = few_glyphs(8);
  TrainOptions opt;
  opt.steps = 80;
  opt.log_every = 20;
  opt.lr = 1e-3;
  opt.batch_size = 4;
  MiitnModel init(kShape, Architecture::preset("desk"), 6);
  init.train_mode(false);
  const double before = mean_recon_error(init, ds);
  const auto out = train_miitn(ds, Architecture::preset("desk"), opt, 6);
  ASSERT_EQ(out.curve.size(), 4u);
  for (const auto& s : out.curve) {
    EXPECT_TRUE(std::isfinite(s.image_recon));
    EXPECT_TRUE(std::isfinite(s.discriminator));
  }
  EXPECT_LT(out.curve.back().image_recon, out.curve.front().image_recon);
  out.model->train_mode(false);
  EXPECT_LT(mean_recon_error(*out.model, ds), 0.8 * before);
}

TEST(Miitn, GeneratorAdapterChecksShape) {
  auto m = std::make_shared<MiitnModel>(kShape, Architecture::preset("desk"), 8);
  m->train_mode(false);
  const MiitnGenerator gen(m);
  EXPECT_NO_THROW(gen.check_shape(kShape));
  EXPECT_THROW(gen.check_shape({32, 32, 3}), std::invalid_argument);
  Rng g(1);
  std::vector<Image> imgs{testutil::random_image(kShape, g), testutil::random_image(kShape, g)};
  const std::vector<ImageView> v(imgs.begin(), imgs.end());
  Rng a(5), b(5);
  const auto batch = gen.sample_batch(v, a);
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch, gen.sample_batch(v, b));
}

TEST(Miitn, PerceptualWeightMustStayZero) {
  LossWeights w;
  EXPECT_NO_THROW(w.validate());
  w.perceptual = 1.0;
  EXPECT_THROW(w.validate(), std::invalid_argument);
}
