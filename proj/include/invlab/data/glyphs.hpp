#pragma once

#include <cstdint>

#include "invlab/data/dataset.hpp"

namespace invlab::data {

/// Procedural stand-in for a handwritten-character base dataset: each class
/// is a fixed set of 2-4 cubic strokes, and each example is a jittered,
/// affinely distorted, anti-aliased rendering of it (white on black).
struct GlyphOptions {
  int num_classes = 49;
  int size = 28;
  int train_per_class = 4828;
  int val_per_class = 20;
  int test_per_class = 100;
  std::uint64_t seed = 49;
  /// Scales every per-example perturbation.
  double variability = 1.0;
};

/// Renders example `index` of class `cls` for a given split stream.
Image render_glyph(const GlyphOptions& options, int cls, std::uint64_t split, std::uint64_t index);

DatasetSplits make_glyph_dataset(const GlyphOptions& options);

}  // namespace invlab::data
