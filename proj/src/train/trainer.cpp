#include "invlab/train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "invlab/core/log.hpp"
#include "invlab/strategies/losses_torch.hpp"

namespace invlab::train {

void TrainSchedule::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (i > 0 && milestones[i] <= milestones[i - 1]) throw std::invalid_argument("milestones must be strictly increasing");
    if (milestones[i] < 0 || (epochs > 0 && milestones[i] >= epochs))
      throw std::invalid_argument("milestones must lie in [0, epochs)");
  }
  strategy.validate(epochs);
}

double TrainSchedule::lr_at(int epoch) const {
  double v = lr;
  for (int m : milestones)
    if (epoch >= m) v *= lr_decay;
  return v;
}

TrainSchedule TrainSchedule::preset(const std::string& name, strategies::StrategyConfig strategy) {
  TrainSchedule s;
  if (name == "k49" || name == "glyph49") {
    s.epochs = 50;
    s.milestones = {30, 40};
    s.strategy = strategy;
    s.strategy.switch_epoch = 30;
    return s;
  }
  if (name == "gtsrb" || name == "cifar10" || name == "cifar100") {
    s.epochs = 200;
    s.milestones = {160, 180};
    s.flip_crop = name != "gtsrb";
    s.strategy = strategy;
    s.strategy.switch_epoch = 160;
    return s;
  }
  throw std::invalid_argument("unknown schedule preset '" + name + "'");
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
  os << "epoch,loss,balanced_val_acc,lr,phase,generated\n" << std::setprecision(17);
  for (const auto& r : history)
    os << r.epoch << ',' << r.loss << ',' << r.balanced_val_acc << ',' << r.lr << ',' << r.phase << ','
       << r.generated << '\n';
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_history_csv(os, history);
}

std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<EpochRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    EpochRecord r;
    char sep = 0;
    is >> r.epoch >> sep >> r.loss >> sep >> r.balanced_val_acc >> sep >> r.lr >> sep;
    std::getline(is, r.phase, ',');
    is >> r.generated;
    if (!is && !is.eof()) throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    out.push_back(std::move(r));
  }
  return out;
}

void random_flip(std::vector<Image>& images, Rng& rng) {
  for (Image& img : images) {
    if (!rng.bernoulli(0.5)) continue;
    const ImageShape s = img.shape();
    for (int i = 0; i < s.height; ++i)
      for (int j = 0; j < s.width / 2; ++j)
        for (int c = 0; c < s.channels; ++c) std::swap(img.at(i, j, c), img.at(i, s.width - 1 - j, c));
  }
}

Image random_crop(ImageView x, int pad, Rng& rng) {
  const ImageShape s = x.shape();
  const auto dy = static_cast<int>(rng.uniform_int(-pad, pad));
  const auto dx = static_cast<int>(rng.uniform_int(-pad, pad));
  Image out(s);
  for (int i = 0; i < s.height; ++i)
    for (int j = 0; j < s.width; ++j) {
      const int si = i + dy, sj = j + dx;
      if (si < 0 || sj < 0 || si >= s.height || sj >= s.width) continue;
      for (int c = 0; c < s.channels; ++c) out.at(i, j, c) = x.at(si, sj, c);
    }
  return out;
}

namespace {

double mean_present_class_accuracy(const TorchClassifier& clf, const data::LabeledImageDataset& ds) {
  const std::vector<int> pred = metrics::predict_labels(clf, ds);
  const metrics::ClassAccuracy a = metrics::per_class_accuracy(pred, ds.labels(), clf.num_classes());
  double s = 0.0;
  int n = 0;
  for (const auto& v : a.per_class)
    if (v) {
      s += *v;
      ++n;
    }
  return n > 0 ? s / n : 0.0;
}

std::string describe_batch(int epoch, std::size_t batch, const Batch& b) {
  std::ostringstream os;
  os << "non-finite loss at epoch " << epoch << ", batch " << batch << "; example ids:";
  for (std::size_t i = 0; i < b.ids.size() && i < 16; ++i) os << ' ' << b.ids[i];
  if (b.ids.size() > 16) os << " ...";
  return os.str();
}

}  // namespace

TrainResult train_classifier(const data::LabeledImageDataset& train, const data::LabeledImageDataset* validation,
                             const BackboneSpec& backbone, const TrainSchedule& schedule, const GitConfig& git,
                             const TransformSampler* generator, std::uint64_t seed, const TrainHooks& hooks) {
  schedule.validate();
  git.validate();
  if (train.empty()) throw std::invalid_argument("train_classifier: empty training set");
  if (backbone.input_shape != train.shape() || backbone.num_classes != train.num_classes())
    throw std::invalid_argument("train_classifier: backbone expects " + to_string(backbone.input_shape) +
                                " inputs, dataset has " + to_string(train.shape()));
  if (git.enabled()) {
    if (generator == nullptr) throw std::invalid_argument("train_classifier: GIT enabled without a generator");
    generator->check_shape(train.shape());
  }

  torch::manual_seed(derive_seed(seed, {stream_id("init")}) >> 1);
  TrainResult result{TorchClassifier(backbone, Normalization::from_dataset(train)), {}};
  TorchClassifier& clf = result.classifier;
  torch::optim::SGD optimizer(clf.net().parameters(), torch::optim::SGDOptions(schedule.lr)
                                                          .momentum(schedule.momentum)
                                                          .weight_decay(schedule.weight_decay));
  const std::vector<std::int64_t>& sizes = train.class_sizes();
  const strategies::StrategyLoss loss_fn(schedule.strategy, sizes);
  const auto bs = static_cast<std::size_t>(schedule.batch_size);

  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    const strategies::EpochSampling sampling = strategies::make_sampler(schedule.strategy, sizes, epoch);
    Rng order_rng(derive_seed(seed, {stream_id("order"), static_cast<std::uint64_t>(epoch)}));
    const std::vector<std::size_t> order = strategies::epoch_order(sampling, train.labels(), order_rng);
    const double lr = schedule.lr_at(epoch);
    for (auto& group : optimizer.param_groups()) static_cast<torch::optim::SGDOptions&>(group.options()).lr(lr);
    clf.net().train();

    EpochRecord rec{epoch, 0.0, 0.0, lr, sampling.phase, 0};
    double loss_sum = 0.0;
    std::size_t loss_batches = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += bs, ++b) {
      const std::size_t end = std::min(order.size(), start + bs);
      if (end - start < 2) break;  // batch norm needs two examples
      Batch batch;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        batch.images.emplace_back(train.image(i));
        batch.labels.push_back(train.label(i));
        batch.ids.push_back(train.id(i));
      }
      Rng aug_rng(derive_seed(seed, {stream_id("augment"), static_cast<std::uint64_t>(epoch), b}));
      std::size_t git_span = 0;
      if (schedule.flip_crop) random_flip(batch.images, aug_rng);
      if (git.enabled()) {
        Rng git_rng(derive_seed(seed, {stream_id("git"), static_cast<std::uint64_t>(epoch), b}));
        rec.generated += git_augment_batch(batch, sizes, git, *generator, git_rng);
        git_span = git_candidate_count(batch.size(), git.p);
      }
      if (schedule.flip_crop)
        for (std::size_t k = git_span; k < batch.size(); ++k) batch.images[k] = random_crop(batch.images[k], 4, aug_rng);

      const std::vector<ImageView> views(batch.images.begin(), batch.images.end());
      const torch::Tensor x = images_to_tensor(views);
      const torch::Tensor y = torch::tensor(std::vector<std::int64_t>(batch.labels.begin(), batch.labels.end()));
      const torch::Tensor loss = loss_fn(clf.logits(x), y, sampling.weights);
      const double value = loss.item<double>();
      if (!std::isfinite(value)) throw NonFiniteLoss(describe_batch(epoch, b, batch));
      optimizer.zero_grad();
      loss.backward();
      optimizer.step();
      loss_sum += value;
      ++loss_batches;
    }
    rec.loss = loss_batches > 0 ? loss_sum / static_cast<double>(loss_batches) : 0.0;
    if (validation != nullptr && !validation->empty()) rec.balanced_val_acc = mean_present_class_accuracy(clf, *validation);
    std::ostringstream msg;
    msg << "epoch " << epoch + 1 << '/' << schedule.epochs << " loss " << rec.loss << " val_bacc "
        << rec.balanced_val_acc << " lr " << lr << ' ' << rec.phase;
    log::debug(msg.str());
    if (hooks.on_epoch) hooks.on_epoch(rec);
    result.history.push_back(rec);
  }
  clf.net().eval();
  return result;
}

}  // namespace invlab::train
