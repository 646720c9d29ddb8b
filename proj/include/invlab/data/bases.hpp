#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "invlab/data/dataset.hpp"
#include "invlab/data/glyphs.hpp"
#include "invlab/data/longtail.hpp"

namespace invlab::data {

// Archive readers -------------------------------------------------------------

struct NpyArray {
  std::string dtype;  // numpy descr, e.g. "|u1", "<i8"
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> bytes;

  std::size_t count() const;
  std::vector<std::int64_t> as_int64() const;
};

NpyArray parse_npy(std::span<const std::uint8_t> buffer);

/// Entry name -> decompressed bytes. Handles stored and deflated entries and
/// zip64 size fields (as written by numpy.savez_compressed).
std::map<std::string, std::vector<std::uint8_t>> read_zip(const std::filesystem::path& path);

/// First array of an .npz (or the one named `entry`).
NpyArray read_npz_array(const std::filesystem::path& path, const std::string& entry = "");

Image read_ppm(const std::filesystem::path& path);
Image resize_bilinear(ImageView x, int height, int width);

/// k49-{train,test}-{imgs,labels}.npz from the official distribution.
DatasetSplits read_k49(const std::filesystem::path& dir);
/// Binary CIFAR-10 (data_batch_{1..5}.bin, test_batch.bin), either in `dir`
/// or in dir/cifar-10-batches-bin.
DatasetSplits read_cifar10(const std::filesystem::path& dir);
/// Binary CIFAR-100 (train.bin, test.bin; fine labels), in `dir` or
/// dir/cifar-100-binary.
DatasetSplits read_cifar100(const std::filesystem::path& dir);
/// Official GTSRB layout: Final_Training/Images/<class>/*.ppm and
/// Final_Test/Images/*.ppm with GT-final_test.csv. Images are resized to
/// 32x32; a seeded 25% of the training images becomes the validation split.
DatasetSplits read_gtsrb(const std::filesystem::path& dir, std::uint64_t val_seed = 0);

// Named bases -------------------------------------------------------------------

/// Default long-tail construction per base.
struct BasePreset {
  std::string name;
  int num_classes = 0;
  DecayLaw law;
  std::int64_t head_size = 0;
  std::int64_t floor = 1;
};

/// k49 | glyph49 | gtsrb | cifar10 | cifar100
BasePreset base_preset(const std::string& name);

/// INVLAB_DATA_DIR if set, else ./data.
std::filesystem::path default_data_root();

/// Loads `name` from root/<name> (portable layout if a manifest exists there,
/// otherwise the official archive layout). glyph49 is generated, not read.
DatasetSplits load_base(const std::string& name, const std::filesystem::path& root,
                        const GlyphOptions& glyph = {});

}  // namespace invlab::data
