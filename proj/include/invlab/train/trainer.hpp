#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "invlab/core/sampler.hpp"
#include "invlab/data/dataset.hpp"
#include "invlab/strategies/strategies.hpp"
#include "invlab/train/classifier.hpp"
#include "invlab/train/git.hpp"

namespace invlab::train {

struct TrainSchedule {
  int epochs = 50;
  int batch_size = 128;
  double lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 2e-4;
  std::vector<int> milestones{30, 40};
  double lr_decay = 0.1;
  /// Random horizontal flip and padded random crop (pad 4), as used for CIFAR.
  bool flip_crop = false;
  strategies::StrategyConfig strategy;

  void validate() const;
  double lr_at(int epoch) const;

  /// k49 | glyph49 | gtsrb | cifar10 | cifar100, with the given strategy.
  static TrainSchedule preset(const std::string& name,
                              strategies::StrategyConfig strategy = {});

  bool operator==(const TrainSchedule&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double balanced_val_acc = 0.0;
  double lr = 0.0;
  std::string phase;
  std::size_t generated = 0;  // examples replaced by the generator
};

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);
void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);
std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path);

struct TrainResult {
  TorchClassifier classifier;
  std::vector<EpochRecord> history;
};

/// Raised when a minibatch produces a non-finite loss; the message names the
/// epoch, batch and example ids.
class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Trains a fresh backbone. `generator` must be set when git.enabled().
/// `validation` (may be null) is scored after every epoch.
TrainResult train_classifier(const data::LabeledImageDataset& train, const data::LabeledImageDataset* validation,
                             const BackboneSpec& backbone, const TrainSchedule& schedule, const GitConfig& git,
                             const TransformSampler* generator, std::uint64_t seed, const TrainHooks& hooks = {});

/// Random horizontal flip of each image with probability 1/2.
void random_flip(std::vector<Image>& images, Rng& rng);
/// Zero-pad by `pad` on each side and crop back at a random offset.
Image random_crop(ImageView x, int pad, Rng& rng);

}  // namespace invlab::train
