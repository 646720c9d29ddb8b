#include "invlab/data/longtail.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "invlab/core/log.hpp"

namespace invlab::data {

DecayLaw DecayLaw::parse(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("decay law must look like zipf:2.0 or exp:100");
  const std::string kind = s.substr(0, colon);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(s.substr(colon + 1), &used);
    if (used != s.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad decay-law parameter in '" + s + "'");
  }
  if (kind == "zipf") return zipf(value);
  if (kind == "exp" || kind == "exponential") return exponential(value);
  throw std::invalid_argument("unknown decay law '" + kind + "'");
}

std::string DecayLaw::to_string() const {
  std::array<char, 40> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), parameter);
  return (kind == Kind::zipf ? "zipf:" : "exp:") + std::string(buf.data(), r.ptr);
}

std::int64_t LongTailPlan::total() const {
  return std::accumulate(target_sizes.begin(), target_sizes.end(), std::int64_t{0});
}

std::int64_t LongTailPlan::target_for_class(int cls) const {
  for (std::size_t r = 0; r < class_order.size(); ++r)
    if (class_order[r] == cls) return target_sizes[r];
  throw std::out_of_range("class not in plan");
}

nlohmann::json LongTailPlan::to_json() const {
  return {{"law", law.to_string()},
          {"floor", floor},
          {"head_size", head_size},
          {"class_order", class_order},
          {"target_sizes", target_sizes},
          {"total", total()}};
}

LongTailPlan make_longtail_plan(int num_classes, std::int64_t head_size, DecayLaw law, std::int64_t floor) {
  if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
  if (head_size <= 0 || floor <= 0) throw std::invalid_argument("head_size and floor must be positive");
  if (head_size < floor) throw std::invalid_argument("head_size must be >= floor");
  if (law.kind == DecayLaw::Kind::zipf && law.parameter < 0.0)
    throw std::invalid_argument("zipf exponent must be >= 0");
  if (law.kind == DecayLaw::Kind::exponential) {
    if (num_classes == 1) throw std::invalid_argument("exponential law needs at least two classes");
    if (law.parameter < 1.0) throw std::invalid_argument("imbalance ratio must be >= 1");
  }

  LongTailPlan plan;
  plan.law = law;
  plan.floor = floor;
  plan.head_size = head_size;
  plan.class_order.resize(static_cast<std::size_t>(num_classes));
  std::iota(plan.class_order.begin(), plan.class_order.end(), 0);
  plan.target_sizes.reserve(static_cast<std::size_t>(num_classes));
  const auto head = static_cast<double>(head_size);
  for (int r = 1; r <= num_classes; ++r) {
    double raw = 0.0;
    if (law.kind == DecayLaw::Kind::zipf) {
      raw = head / std::pow(static_cast<double>(r), law.parameter);
    } else {
      raw = head * std::pow(law.parameter, -static_cast<double>(r - 1) / (num_classes - 1));
    }
    // nearbyint honours the default round-half-to-even mode.
    const auto rounded = static_cast<std::int64_t>(std::nearbyint(raw));
    plan.target_sizes.push_back(std::max(floor, rounded));
  }
  return plan;
}

std::vector<int> class_ordering(int num_classes, std::uint64_t ordering_seed) {
  std::vector<int> order(static_cast<std::size_t>(num_classes));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(ordering_seed, {stream_id("order")}));
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

LongTailPlan with_ordering(LongTailPlan plan, std::uint64_t ordering_seed) {
  plan.class_order = class_ordering(static_cast<int>(plan.target_sizes.size()), ordering_seed);
  return plan;
}

namespace {

void check_plan_matches(const LabeledImageDataset& base, const LongTailPlan& plan) {
  if (plan.target_sizes.size() != static_cast<std::size_t>(base.num_classes()) ||
      plan.class_order.size() != plan.target_sizes.size())
    throw std::invalid_argument("plan has " + std::to_string(plan.target_sizes.size()) +
                                " ranks but dataset has " + std::to_string(base.num_classes()) + " classes");
  std::vector<bool> seen(plan.class_order.size(), false);
  for (int c : plan.class_order) {
    if (c < 0 || c >= base.num_classes() || seen[static_cast<std::size_t>(c)])
      throw std::invalid_argument("plan class_order is not a permutation");
    seen[static_cast<std::size_t>(c)] = true;
  }
}

}  // namespace

LabeledImageDataset build_longtail_dataset(const LabeledImageDataset& base, const LongTailPlan& plan,
                                           std::uint64_t ordering_seed) {
  if (base.metadata().split == "test") throw std::invalid_argument("test splits are never pruned");
  check_plan_matches(base, plan);

  const auto by_class = base.indices_by_class();
  std::vector<std::size_t> keep;
  std::vector<std::int64_t> actual(static_cast<std::size_t>(base.num_classes()), 0);
  nlohmann::json shortfalls = nlohmann::json::array();
  for (std::size_t r = 0; r < plan.class_order.size(); ++r) {
    const int cls = plan.class_order[r];
    const auto& members = by_class[static_cast<std::size_t>(cls)];
    const auto available = static_cast<std::int64_t>(members.size());
    const std::int64_t target = plan.target_sizes[r];
    const std::int64_t take = std::min(target, available);
    if (take < target) {
      log::warn("class " + std::to_string(cls) + " (rank " + std::to_string(r + 1) + ") has " +
                std::to_string(available) + " examples, below its target of " + std::to_string(target));
      shortfalls.push_back({{"class", cls}, {"rank", r + 1}, {"target", target}, {"available", available}});
    }
    Rng rng(derive_seed(ordering_seed, {stream_id("members"), static_cast<std::uint64_t>(cls)}));
    for (std::size_t k : sample_without_replacement(members.size(), static_cast<std::size_t>(take), rng))
      keep.push_back(members[k]);
    actual[static_cast<std::size_t>(cls)] = take;
  }
  std::sort(keep.begin(), keep.end());

  LabeledImageDataset out = base.subset(keep);
  auto& meta = out.metadata();
  meta.seed = ordering_seed;
  meta.info["plan"] = plan.to_json();
  meta.info["ordering_seed"] = ordering_seed;
  meta.info["actual_sizes"] = actual;
  meta.info["shortfalls"] = shortfalls;
  return out;
}

LabeledImageDataset build_isotransform_dataset(const LabeledImageDataset& base, const LongTailPlan& plan,
                                               const nuisance::TransformDistribution& t,
                                               std::size_t originals_per_class, std::uint64_t seed) {
  if (originals_per_class == 0) throw std::invalid_argument("originals_per_class must be >= 1");
  check_plan_matches(base, plan);
  t.check_shape(base.shape());

  const auto by_class = base.indices_by_class();
  DatasetMetadata meta = base.metadata();
  meta.seed = seed;
  meta.info["plan"] = plan.to_json();
  meta.info["originals_per_class"] = originals_per_class;
  meta.info["transform"] = {{"family", nuisance::to_string(t.family())}, {"seed", seed}};
  LabeledImageDataset out(base.shape(), base.num_classes(), std::move(meta));
  out.reserve(static_cast<std::size_t>(plan.total()));

  // Collect per-class blocks first, then emit in class order so the output
  // layout does not depend on the plan's rank order.
  struct Block {
    std::vector<std::size_t> originals;
    std::int64_t target = 0;
  };
  std::vector<Block> blocks(static_cast<std::size_t>(base.num_classes()));
  for (std::size_t r = 0; r < plan.class_order.size(); ++r) {
    const int cls = plan.class_order[r];
    const auto& members = by_class[static_cast<std::size_t>(cls)];
    if (members.size() < originals_per_class)
      throw std::invalid_argument("class " + std::to_string(cls) + " has only " +
                                  std::to_string(members.size()) + " examples, fewer than originals_per_class");
    if (plan.target_sizes[r] < static_cast<std::int64_t>(originals_per_class))
      throw std::invalid_argument("target size below originals_per_class at rank " + std::to_string(r + 1));
    Rng pick(derive_seed(seed, {stream_id("originals"), static_cast<std::uint64_t>(cls)}));
    Block& b = blocks[static_cast<std::size_t>(cls)];
    for (std::size_t k : sample_without_replacement(members.size(), originals_per_class, pick))
      b.originals.push_back(members[k]);
    b.target = plan.target_sizes[r];
  }

  nlohmann::json origins = nlohmann::json::array();
  for (int cls = 0; cls < base.num_classes(); ++cls) {
    const Block& b = blocks[static_cast<std::size_t>(cls)];
    for (std::int64_t k = 0; k < b.target; ++k) {
      const std::size_t src = b.originals[static_cast<std::size_t>(k) % b.originals.size()];
      const std::uint64_t id = derive_seed(base.id(src), {static_cast<std::uint64_t>(k)});
      Rng rng(derive_seed(seed, {id}));
      nuisance::Sample s = t.sample_with_params(base.image(src), rng);
      out.add(s.image, cls, id, std::move(s.params));
      origins.push_back(base.id(src));
    }
  }
  out.metadata().info["origin_ids"] = std::move(origins);
  return out;
}

}  // namespace invlab::data
