#include "invlab/nuisance/transforms.hpp"

#include <algorithm>
#include <stdexcept>

namespace invlab::nuisance {

std::string to_string(Family f) {
  switch (f) {
    case Family::identity: return "identity";
    case Family::rotation: return "rotation";
    case Family::background: return "background";
    case Family::dilation_erosion: return "dilation_erosion";
  }
  return "unknown";
}

Family parse_family(const std::string& s) {
  if (s == "identity" || s == "none") return Family::identity;
  if (s == "rotation" || s == "rot") return Family::rotation;
  if (s == "background" || s == "bg") return Family::background;
  if (s == "dilation_erosion" || s == "dil") return Family::dilation_erosion;
  throw std::invalid_argument("unknown transform family '" + s + "'");
}

Image raise_background(ImageView x, int level) {
  if (x.channels() != 1)
    throw std::invalid_argument("background family requires grayscale images, got " +
                                to_string(x.shape()));
  if (level < 0 || level > 255) throw std::invalid_argument("background level out of [0,255]");
  Image out(x);
  const auto b = static_cast<std::uint8_t>(level);
  for (auto& v : out.data()) v = std::max(v, b);
  return out;
}

Family family_of(const TransformParams& p) {
  struct {
    Family operator()(const IdentityParams&) const { return Family::identity; }
    Family operator()(const RotationParams&) const { return Family::rotation; }
    Family operator()(const BackgroundParams&) const { return Family::background; }
    Family operator()(const MorphologyParams&) const { return Family::dilation_erosion; }
  } visitor;
  return std::visit(visitor, p);
}

Image apply(ImageView x, const TransformParams& p) {
  struct {
    ImageView x;
    Image operator()(const IdentityParams&) const { return Image(x); }
    Image operator()(const RotationParams& r) const { return rotate(x, r.angle); }
    Image operator()(const BackgroundParams& b) const { return raise_background(x, b.level); }
    Image operator()(const MorphologyParams& m) const {
      return m.op == MorphOp::dilate ? dilate(x, m.kernel) : erode(x, m.kernel);
    }
  } visitor{x};
  return std::visit(visitor, p);
}

nlohmann::json to_json(const TransformRecord& r) {
  nlohmann::json j;
  j["family"] = to_string(family_of(r.params));
  j["seed"] = r.seed;
  nlohmann::json params = nlohmann::json::object();
  if (const auto* rot = std::get_if<RotationParams>(&r.params)) {
    params["angle"] = rot->angle;
  } else if (const auto* bg = std::get_if<BackgroundParams>(&r.params)) {
    params["level"] = bg->level;
  } else if (const auto* m = std::get_if<MorphologyParams>(&r.params)) {
    params["op"] = m->op == MorphOp::dilate ? "dilate" : "erode";
    params["kernel"] = m->kernel;
  }
  j["parameters"] = params;
  return j;
}

TransformRecord record_from_json(const nlohmann::json& j) {
  TransformRecord r;
  r.seed = j.value("seed", std::uint64_t{0});
  const nlohmann::json& params = j.at("parameters");
  switch (parse_family(j.at("family").get<std::string>())) {
    case Family::identity: r.params = IdentityParams{}; break;
    case Family::rotation: r.params = RotationParams{params.at("angle").get<double>()}; break;
    case Family::background: r.params = BackgroundParams{params.at("level").get<int>()}; break;
    case Family::dilation_erosion: {
      const auto op = params.at("op").get<std::string>();
      if (op != "dilate" && op != "erode") throw std::invalid_argument("unknown morphology op " + op);
      r.params = MorphologyParams{op == "dilate" ? MorphOp::dilate : MorphOp::erode,
                                  params.at("kernel").get<int>()};
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

TransformDistribution TransformDistribution::identity() { return TransformDistribution(Family::identity); }

TransformDistribution TransformDistribution::rotation(RotationRange range) {
  if (!(range.max_angle > range.min_angle)) throw std::invalid_argument("empty rotation range");
  TransformDistribution t(Family::rotation);
  t.rotation_ = range;
  return t;
}

TransformDistribution TransformDistribution::background(BackgroundRange range) {
  if (range.min_level < 0 || range.max_level > 255 || range.min_level > range.max_level)
    throw std::invalid_argument("background range must satisfy 0 <= min <= max <= 255");
  TransformDistribution t(Family::background);
  t.background_ = range;
  return t;
}

TransformDistribution TransformDistribution::dilation_erosion(MorphologyMix mix) {
  if (mix.dilate_probability < 0.0 || mix.dilate_probability > 1.0)
    throw std::invalid_argument("dilation probability must be in [0,1]");
  if (mix.dilate_kernels.empty() || mix.erode_kernels.empty())
    throw std::invalid_argument("morphology kernel lists must be non-empty");
  TransformDistribution t(Family::dilation_erosion);
  t.morphology_ = std::move(mix);
  return t;
}

TransformDistribution TransformDistribution::of(Family family) {
  switch (family) {
    case Family::identity: return identity();
    case Family::rotation: return rotation();
    case Family::background: return background();
    case Family::dilation_erosion: return dilation_erosion();
  }
  throw std::invalid_argument("unknown family");
}

TransformParams TransformDistribution::draw(Rng& rng) const {
  switch (family_) {
    case Family::identity: return IdentityParams{};
    case Family::rotation: return RotationParams{rng.uniform(rotation_.min_angle, rotation_.max_angle)};
    case Family::background:
      return BackgroundParams{
          static_cast<int>(rng.uniform_int(background_.min_level, background_.max_level))};
    case Family::dilation_erosion: {
      const bool dil = rng.bernoulli(morphology_.dilate_probability);
      const auto& sizes = dil ? morphology_.dilate_kernels : morphology_.erode_kernels;
      const int k = sizes[rng.below(sizes.size())];
      return MorphologyParams{dil ? MorphOp::dilate : MorphOp::erode, k};
    }
  }
  return IdentityParams{};
}

Sample TransformDistribution::sample_with_params(ImageView x, Rng& rng) const {
  TransformParams p = draw(rng);
  return Sample{nuisance::apply(x, p), p};
}

Image TransformDistribution::sample(ImageView x, Rng& rng) const {
  return sample_with_params(x, rng).image;
}

void TransformDistribution::check_shape(const ImageShape& shape) const {
  if (shape.height <= 0 || shape.width <= 0 || shape.channels <= 0)
    throw std::invalid_argument("empty image shape");
  if (family_ == Family::background && shape.channels != 1)
    throw std::invalid_argument("background family requires grayscale images");
}

TransformDistribution compose_identity() { return TransformDistribution::identity(); }

Sample sample_rotation(ImageView x, Rng& rng) {
  return TransformDistribution::rotation().sample_with_params(x, rng);
}

Sample sample_background(ImageView x, Rng& rng) {
  if (x.channels() != 1) throw std::invalid_argument("background family requires grayscale images");
  return TransformDistribution::background().sample_with_params(x, rng);
}

Sample sample_dilation_erosion(ImageView x, Rng& rng) {
  return TransformDistribution::dilation_erosion().sample_with_params(x, rng);
}

}  // namespace invlab::nuisance
