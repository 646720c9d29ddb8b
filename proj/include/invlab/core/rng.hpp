#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace invlab {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stable 64-bit label for a named stream ("transform", "order", ...).
std::uint64_t stream_id(std::string_view name);

/// Derives a child key from a parent key and a path of stream ids.
///
/// The scheme is purely functional: child = mix64(parent ^ mix64(id + C)),
/// folded left over the path. Children never depend on how many values were
/// drawn from the parent, so per-class and per-image streams are identical
/// whatever order (or thread) they are consumed in.
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path);

/// Counter-based generator. The k-th output of a stream with key K is
/// mix64(K + k * golden), i.e. SplitMix64 started at K.
///
/// Integer and real distributions are implemented here rather than with
/// <random> distributions so that draws are identical across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  /// Independent child stream; does not advance this stream.
  Rng split(std::uint64_t id) const { return Rng(derive_seed(key_, {id})); }
  Rng split(std::string_view name) const { return split(stream_id(name)); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on [0, n), unbiased (rejection). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform on the closed integer range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal (Box-Muller, one value per call).
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace invlab
