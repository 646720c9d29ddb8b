#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "invlab/data/longtail.hpp"
#include "invlab/train/git.hpp"
#include "invlab/train/trainer.hpp"

namespace invlab::exp {

/// Bad or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which long-tailed variant to build for each replicate.
struct VariantSpec {
  std::string base = "glyph49";
  nuisance::Family family = nuisance::Family::identity;
  data::DecayLaw law = data::DecayLaw::zipf(2.0);
  std::int64_t head_size = 4828;
  std::int64_t floor = 5;
  /// Seed of the one-shot transform applied to every split. The long-tail
  /// ordering comes from the replicate seed instead.
  std::uint64_t data_seed = 0;
  double glyph_variability = 2.5;

  bool operator==(const VariantSpec&) const = default;
};

/// Everything needed to run one method over a list of replicate seeds.
///
/// The file form is flat `key = value` lines; `#` starts a comment. Keys not
/// present keep the defaults listed by `ExperimentConfig::documented_keys()`.
struct ExperimentConfig {
  std::string label;  // empty: derived from strategy and git settings
  VariantSpec variant;
  train::GitConfig git;
  /// Includes the strategy (loss, sampling schedule).
  train::TrainSchedule schedule;
  std::string architecture = "simple_cnn";
  int width = 16;
  int ekld_samples = 8;
  std::uint64_t ekld_seed = 0;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "runs";

  /// Preset for a base dataset: its long-tail law and training schedule.
  static ExperimentConfig preset(const std::string& base);

  /// Throws ConfigError.
  void validate() const;

  std::string method_label() const;

  std::map<std::string, std::string> to_kv() const;
  /// Unknown keys are a ConfigError.
  static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);

  std::string serialize() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Content hash of everything that affects a replicate's result, i.e. all
  /// keys except `seeds` and `output_dir`. 16 hex digits.
  std::string content_hash() const;

  /// MIITN checkpoint for a replicate: "{seed}" in the configured path is
  /// replaced by the seed.
  std::filesystem::path miitn_checkpoint_for(std::uint64_t seed) const;

  /// Key, default value and one-line description for every key.
  static std::vector<std::array<std::string, 3>> documented_keys();

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses `key = value` lines into a map (ConfigError on malformed lines or
/// duplicate keys).
std::map<std::string, std::string> parse_kv(const std::string& text);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace invlab::exp
