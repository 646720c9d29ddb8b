#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "invlab/core/image.hpp"
#include "invlab/core/rng.hpp"
#include "invlab/core/sampler.hpp"

namespace invlab::nuisance {

enum class Family { identity, rotation, background, dilation_erosion };

std::string to_string(Family f);
/// Accepts the long names and the CLI short forms none|rot|bg|dil.
Family parse_family(const std::string& s);

// ---------------------------------------------------------------------------
// Deterministic primitives. Each is a pure function of its parameters.

/// Rotation about the image centre by `angle` radians with bilinear
/// interpolation and zero fill. Output pixel (i, j) samples the input at
///   si = ci + cos(a) (i - ci) + sin(a) (j - cj)
///   sj = cj - sin(a) (i - ci) + cos(a) (j - cj)
/// with (ci, cj) = ((H-1)/2, (W-1)/2). At a = pi/2 on a square image this is
/// transpose followed by a vertical flip.
Image rotate(ImageView x, double angle);
/// Same as rotate() without the final rounding to 8 bits.
std::vector<float> rotate_exact(ImageView x, double angle);

/// Elementwise max(x, level). Grayscale only.
Image raise_background(ImageView x, int level);

enum class MorphOp { dilate, erode };

/// Window offsets for a k x k all-ones structuring element: the anchor sits
/// at (k-1)/2, so even kernels extend one pixel less above/left of the
/// anchor than below/right. k = 2 covers offsets {0, +1}.
int morphology_anchor(int kernel);

/// Max filter. Out-of-image samples read as 0.
Image dilate(ImageView x, int kernel);
/// Min filter. Out-of-image samples read as 255.
Image erode(ImageView x, int kernel);

// ---------------------------------------------------------------------------
// Drawn parameters.

struct IdentityParams {
  bool operator==(const IdentityParams&) const = default;
};
struct RotationParams {
  double angle = 0.0;
  bool operator==(const RotationParams&) const = default;
};
struct BackgroundParams {
  int level = 0;
  bool operator==(const BackgroundParams&) const = default;
};
struct MorphologyParams {
  MorphOp op = MorphOp::dilate;
  int kernel = 1;
  bool operator==(const MorphologyParams&) const = default;
};

using TransformParams = std::variant<IdentityParams, RotationParams, BackgroundParams, MorphologyParams>;

Family family_of(const TransformParams& p);
Image apply(ImageView x, const TransformParams& p);

/// A drawn transform plus the key of the stream it was drawn from. Replaying
/// either field reproduces the output.
struct TransformRecord {
  TransformParams params;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const TransformRecord& r);
TransformRecord record_from_json(const nlohmann::json& j);

struct Sample {
  Image image;
  TransformParams params;
};

/// Free-function samplers for each family, with the ranges used to build the
/// synthetic variants.
Sample sample_rotation(ImageView x, Rng& rng);
Sample sample_background(ImageView x, Rng& rng);
Sample sample_dilation_erosion(ImageView x, Rng& rng);

// ---------------------------------------------------------------------------

struct RotationRange {
  double min_angle = 0.0;
  double max_angle = 6.283185307179586;  // [min, max)
};
struct BackgroundRange {
  int min_level = 0;
  int max_level = 100;  // inclusive
};
struct MorphologyMix {
  double dilate_probability = 0.6;
  std::vector<int> dilate_kernels{2, 3, 4};
  std::vector<int> erode_kernels{1, 2};
};

/// A sampleable nuisance distribution T(.|x). Sampling is split into
/// draw() and apply() so a drawn parameter fully determines the output.
class TransformDistribution final : public TransformSampler {
 public:
  static TransformDistribution identity();
  static TransformDistribution rotation(RotationRange range = {});
  static TransformDistribution background(BackgroundRange range = {});
  static TransformDistribution dilation_erosion(MorphologyMix mix = {});
  static TransformDistribution of(Family family);

  Family family() const { return family_; }

  TransformParams draw(Rng& rng) const;
  Sample sample_with_params(ImageView x, Rng& rng) const;

  Image sample(ImageView x, Rng& rng) const override;
  void check_shape(const ImageShape& shape) const override;
  std::string name() const override { return "oracle:" + to_string(family_); }

 private:
  explicit TransformDistribution(Family f) : family_(f) {}

  Family family_;
  RotationRange rotation_;
  BackgroundRange background_;
  MorphologyMix morphology_;
};

/// The distribution whose every sample is its input.
TransformDistribution compose_identity();

}  // namespace invlab::nuisance
