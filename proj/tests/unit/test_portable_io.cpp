#include <gtest/gtest.h>

#include <fstream>

#include "helpers.hpp"
#include "invlab/data/io.hpp"

using namespace invlab;
using namespace invlab::data;

namespace {

LabeledImageDataset small_dataset(ImageShape shape, int classes, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledImageDataset ds(shape, classes);
  for (std::size_t i = 0; i < n; ++i)
    ds.add(testutil::random_image(shape, rng), static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))),
           1000 + 3 * i);
  return ds;
}

}  // namespace

TEST(TransformCodec, RoundTripsEveryKind) {
  using namespace invlab::nuisance;
  const std::vector<TransformParams> all{IdentityParams{}, RotationParams{0.1 + 0.2},
                                         RotationParams{6.283185307179586}, BackgroundParams{0},
                                         BackgroundParams{100}, MorphologyParams{MorphOp::dilate, 4},
                                         MorphologyParams{MorphOp::erode, 1}};
  for (const auto& p : all) EXPECT_EQ(decode_transform(encode_transform(p)), p) << encode_transform(p);
  EXPECT_EQ(encode_transform(BackgroundParams{37}), "background:37");
  EXPECT_EQ(encode_transform(MorphologyParams{MorphOp::erode, 2}), "erode:2");
  EXPECT_THROW(decode_transform("shear:3"), std::invalid_argument);
}

TEST(Png, GrayAndRgbRoundTrip) {
  testutil::TempDir dir("png");
  Rng rng(2);
  for (const ImageShape shape : {ImageShape{7, 5, 1}, ImageShape{4, 9, 3}}) {
    const Image x = testutil::random_image(shape, rng);
    const auto path = dir.path() / ("x" + std::to_string(shape.channels) + ".png");
    write_png(path, x);
    EXPECT_EQ(read_png(path), x);
  }
}

TEST(Portable, SplitsLabelsIdsAndTransformsSurvive) {
  testutil::TempDir dir("portable");
  DatasetSplits splits;
  const auto base = small_dataset({6, 6, 1}, 5, 12, 3);
  splits.train = apply_oneshot_transform(base, nuisance::TransformDistribution::background(), 9);
  splits.test = small_dataset({6, 6, 1}, 5, 4, 4);
  splits.val = small_dataset({6, 6, 1}, 5, 3, 5);
  write_portable(dir.path(), splits, {{"note", "fixture"}});
  ASSERT_TRUE(is_portable_layout(dir.path()));

  const DatasetSplits back = read_portable(dir.path());
  EXPECT_EQ(back.train, splits.train);
  EXPECT_TRUE(back.train.has_transform_params());
  EXPECT_EQ(back.test, splits.test);
  ASSERT_TRUE(back.val.has_value());
  EXPECT_EQ(*back.val, *splits.val);
  EXPECT_EQ(back.train.class_sizes(), splits.train.class_sizes());
}

TEST(Portable, MissingManifestIsNotPortable) {
  testutil::TempDir dir("bare");
  EXPECT_FALSE(is_portable_layout(dir.path()));
}

TEST(Packed, RoundTripAndHeaderLayout) {
  testutil::TempDir dir("packed");
  const auto ds = small_dataset({3, 4, 3}, 10, 6, 6);
  const auto path = dir.path() / "ds.bin";
  write_packed(path, ds);
  const auto back = read_packed(path, 10);
  ASSERT_EQ(back.size(), ds.size());
  EXPECT_EQ(std::vector<std::uint8_t>(back.pixels().begin(), back.pixels().end()),
            std::vector<std::uint8_t>(ds.pixels().begin(), ds.pixels().end()));
  EXPECT_EQ(std::vector<int>(back.labels().begin(), back.labels().end()),
            std::vector<int>(ds.labels().begin(), ds.labels().end()));

  // 8 magic bytes + 4 uint32 dims + pixels + int32 labels
  EXPECT_EQ(std::filesystem::file_size(path), 8 + 16 + 6 * 36 + 6 * 4);
  std::ifstream in(path, std::ios::binary);
  std::string magic(8, '\0');
  in.read(magic.data(), 8);
  EXPECT_EQ(magic, "INVLDS01");
}

TEST(Packed, RejectsBadMagicAndOutOfRangeLabels) {
  testutil::TempDir dir("packed-bad");
  const auto path = dir.path() / "ds.bin";
  write_packed(path, small_dataset({2, 2, 1}, 10, 3, 7));
  EXPECT_THROW(read_packed(path, 1), std::exception);
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(read_packed(path, 10), std::runtime_error);
}
