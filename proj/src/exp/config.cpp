#include "invlab/exp/config.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "invlab/data/bases.hpp"

namespace fs = std::filesystem;

namespace invlab::exp {

namespace {

// Bumped whenever a change in the training or evaluation code should
// invalidate cached replicate results.
constexpr std::string_view kResultSalt = "invlab-results-1";

std::string fmt(double v) {
  std::array<char, 40> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) throw ConfigError("bad value for '" + key + "': '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + text + "'");
}

std::string generator_name(train::GeneratorKind g) {
  switch (g) {
    case train::GeneratorKind::none: return "none";
    case train::GeneratorKind::oracle: return "oracle";
    case train::GeneratorKind::miitn: return "miitn";
  }
  return "none";
}

train::GeneratorKind parse_generator(const std::string& s) {
  if (s == "none") return train::GeneratorKind::none;
  if (s == "oracle") return train::GeneratorKind::oracle;
  if (s == "miitn") return train::GeneratorKind::miitn;
  throw ConfigError("unknown git.generator '" + s + "' (none|oracle|miitn)");
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

const std::set<std::string>& strategy_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k;
    for (const auto& [key, value] : strategies::StrategyConfig{}.to_kv()) k.insert(key);
    return k;
  }();
  return keys;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError("duplicate key '" + key + "'");
  }
  return kv;
}

ExperimentConfig ExperimentConfig::preset(const std::string& base) {
  ExperimentConfig c;
  data::BasePreset p;
  train::TrainSchedule schedule;
  try {
    p = data::base_preset(base);
    schedule = train::TrainSchedule::preset(base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  c.variant.base = base;
  c.variant.law = p.law;
  c.variant.head_size = p.head_size;
  c.variant.floor = p.floor;
  c.schedule = schedule;
  if (base != "k49" && base != "glyph49") c.architecture = "resnet32";
  return c;
}

void ExperimentConfig::validate() const {
  try {
    data::base_preset(variant.base);
    schedule.validate();
    git.validate();
    if (git.generator == train::GeneratorKind::oracle && git.oracle_family == nuisance::Family::identity)
      throw ConfigError("git.generator = oracle needs git.oracle_family");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (variant.head_size <= 0 || variant.floor <= 0) throw ConfigError("head_size and floor must be positive");
  if (!(variant.glyph_variability >= 0.0)) throw ConfigError("glyph_variability must be >= 0");
  if (architecture != "simple_cnn" && architecture != "resnet20" && architecture != "resnet32")
    throw ConfigError("unknown architecture '" + architecture + "'");
  if (width < 1) throw ConfigError("width must be >= 1");
  if (ekld_samples < 1) throw ConfigError("ekld.samples must be >= 1");
  if (seeds.empty()) throw ConfigError("seeds must list at least one replicate seed");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("seeds must be distinct");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

std::string ExperimentConfig::method_label() const {
  if (!label.empty()) return label;
  std::string l = schedule.strategy.label();
  if (git.generator == train::GeneratorKind::oracle) l += "+Oracle";
  if (git.generator == train::GeneratorKind::miitn) l += git.cutoff ? "+GIT" : "+GIT(all)";
  return l;
}

std::map<std::string, std::string> ExperimentConfig::to_kv() const {
  std::map<std::string, std::string> kv = schedule.strategy.to_kv();
  kv["label"] = label;
  kv["base"] = variant.base;
  kv["family"] = nuisance::to_string(variant.family);
  kv["law"] = variant.law.to_string();
  kv["head_size"] = std::to_string(variant.head_size);
  kv["floor"] = std::to_string(variant.floor);
  kv["data_seed"] = std::to_string(variant.data_seed);
  kv["glyph_variability"] = fmt(variant.glyph_variability);

  kv["git.generator"] = generator_name(git.generator);
  kv["git.p"] = fmt(git.p);
  kv["git.cutoff"] = git.cutoff ? std::to_string(*git.cutoff) : "all";
  kv["git.oracle_family"] = nuisance::to_string(git.oracle_family);
  kv["git.miitn_checkpoint"] = git.miitn_checkpoint;

  kv["epochs"] = std::to_string(schedule.epochs);
  kv["batch_size"] = std::to_string(schedule.batch_size);
  kv["lr"] = fmt(schedule.lr);
  kv["momentum"] = fmt(schedule.momentum);
  kv["weight_decay"] = fmt(schedule.weight_decay);
  kv["milestones"] = join(schedule.milestones);
  kv["lr_decay"] = fmt(schedule.lr_decay);
  kv["flip_crop"] = schedule.flip_crop ? "true" : "false";

  kv["architecture"] = architecture;
  kv["width"] = std::to_string(width);
  kv["ekld.samples"] = std::to_string(ekld_samples);
  kv["ekld.seed"] = std::to_string(ekld_seed);
  kv["seeds"] = join(seeds);
  kv["output_dir"] = output_dir.string();
  return kv;
}

ExperimentConfig ExperimentConfig::from_kv(const std::map<std::string, std::string>& kv) {
  std::set<std::string> known;
  for (const auto& k : documented_keys()) known.insert(k[0]);
  for (const auto& [key, value] : kv)
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");

  // Start from the base's preset so a file naming only `base` is complete.
  ExperimentConfig c;
  if (auto it = kv.find("base"); it != kv.end()) c = preset(it->second);
  const auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  try {
    std::map<std::string, std::string> skv = c.schedule.strategy.to_kv();
    for (const auto& key : strategy_keys())
      if (auto v = get(key.c_str())) skv[key] = *v;
    c.schedule.strategy = strategies::StrategyConfig::from_kv(skv);

    if (auto v = get("label")) c.label = *v;
    if (auto v = get("family")) c.variant.family = nuisance::parse_family(*v);
    if (auto v = get("law")) c.variant.law = data::DecayLaw::parse(*v);
    if (auto v = get("head_size")) c.variant.head_size = parse_number<std::int64_t>("head_size", *v);
    if (auto v = get("floor")) c.variant.floor = parse_number<std::int64_t>("floor", *v);
    if (auto v = get("data_seed")) c.variant.data_seed = parse_number<std::uint64_t>("data_seed", *v);
    if (auto v = get("glyph_variability")) c.variant.glyph_variability = parse_number<double>("glyph_variability", *v);

    if (auto v = get("git.generator")) c.git.generator = parse_generator(*v);
    if (auto v = get("git.p")) c.git.p = parse_number<double>("git.p", *v);
    if (auto v = get("git.cutoff"))
      c.git.cutoff = *v == "all" ? std::nullopt : std::optional(parse_number<std::int64_t>("git.cutoff", *v));
    if (auto v = get("git.oracle_family")) c.git.oracle_family = nuisance::parse_family(*v);
    if (auto v = get("git.miitn_checkpoint")) c.git.miitn_checkpoint = *v;

    if (auto v = get("epochs")) c.schedule.epochs = parse_number<int>("epochs", *v);
    if (auto v = get("batch_size")) c.schedule.batch_size = parse_number<int>("batch_size", *v);
    if (auto v = get("lr")) c.schedule.lr = parse_number<double>("lr", *v);
    if (auto v = get("momentum")) c.schedule.momentum = parse_number<double>("momentum", *v);
    if (auto v = get("weight_decay")) c.schedule.weight_decay = parse_number<double>("weight_decay", *v);
    if (auto v = get("milestones")) {
      c.schedule.milestones.clear();
      for (const auto& m : split_list(*v)) c.schedule.milestones.push_back(parse_number<int>("milestones", m));
    }
    if (auto v = get("lr_decay")) c.schedule.lr_decay = parse_number<double>("lr_decay", *v);
    if (auto v = get("flip_crop")) c.schedule.flip_crop = parse_bool("flip_crop", *v);

    if (auto v = get("architecture")) c.architecture = *v;
    if (auto v = get("width")) c.width = parse_number<int>("width", *v);
    if (auto v = get("ekld.samples")) c.ekld_samples = parse_number<int>("ekld.samples", *v);
    if (auto v = get("ekld.seed")) c.ekld_seed = parse_number<std::uint64_t>("ekld.seed", *v);
    if (auto v = get("seeds")) {
      c.seeds.clear();
      for (const auto& s : split_list(*v)) c.seeds.push_back(parse_number<std::uint64_t>("seeds", s));
    }
    if (auto v = get("output_dir")) c.output_dir = *v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  for (const auto& [key, value] : to_kv()) os << key << " = " << value << '\n';
  return os.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) { return from_kv(parse_kv(text)); }

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

void ExperimentConfig::save(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize();
}

std::string ExperimentConfig::content_hash() const {
  auto kv = to_kv();
  kv.erase("label");
  kv.erase("seeds");
  kv.erase("output_dir");
  std::string text(kResultSalt);
  text += '\n';
  for (const auto& [key, value] : kv) text += key + '=' + value + '\n';
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf.data();
}

fs::path ExperimentConfig::miitn_checkpoint_for(std::uint64_t seed) const {
  std::string p = git.miitn_checkpoint;
  const std::string token = "{seed}";
  for (auto pos = p.find(token); pos != std::string::npos; pos = p.find(token))
    p.replace(pos, token.size(), std::to_string(seed));
  return p;
}

std::vector<std::array<std::string, 3>> ExperimentConfig::documented_keys() {
  const ExperimentConfig d;
  auto kv = d.to_kv();
  const std::vector<std::pair<std::string, std::string>> docs{
      {"label", "method label in tables and figures; empty derives one from the strategy"},
      {"base", "base dataset: glyph49 | k49 | gtsrb | cifar10 | cifar100 (sets law/schedule defaults)"},
      {"family", "one-shot nuisance applied to every split: identity | rotation | background | dilation_erosion"},
      {"law", "class-size decay law, zipf:<exponent> or exp:<imbalance ratio>"},
      {"head_size", "size of the largest class"},
      {"floor", "minimum class size"},
      {"data_seed", "seed of the one-shot nuisance transform"},
      {"glyph_variability", "per-example distortion scale of the glyph49 generator"},
      {"loss", "ce | focal | ldam"},
      {"gamma", "focal exponent"},
      {"max_margin", "largest LDAM margin"},
      {"scale", "LDAM logit scale"},
      {"schedule", "erm | rs | cb_rs | drs | drw | cb_rw"},
      {"beta", "effective-number beta for cb_rs / cb_rw / drw"},
      {"switch_epoch", "epoch at which drs / drw switch to class-balanced"},
      {"git.generator", "none | oracle | miitn"},
      {"git.p", "leading fraction of each batch offered to the generator"},
      {"git.cutoff", "augment classes with at most this many examples, or all"},
      {"git.oracle_family", "nuisance family sampled by the oracle generator"},
      {"git.miitn_checkpoint", "MIITN checkpoint path; {seed} expands to the replicate seed"},
      {"epochs", "training epochs"},
      {"batch_size", "minibatch size"},
      {"lr", "initial SGD learning rate"},
      {"momentum", "SGD momentum"},
      {"weight_decay", "SGD weight decay"},
      {"milestones", "comma-separated epochs at which lr is multiplied by lr_decay"},
      {"lr_decay", "learning-rate decay factor"},
      {"flip_crop", "random horizontal flip and padded crop"},
      {"architecture", "simple_cnn | resnet20 | resnet32"},
      {"width", "first-layer width of simple_cnn"},
      {"ekld.samples", "transformed draws per held-out input"},
      {"ekld.seed", "seed of the eKLD draws"},
      {"seeds", "comma-separated replicate seeds (long-tail ordering and training)"},
      {"output_dir", "root directory for results"},
  };
  std::vector<std::array<std::string, 3>> out;
  for (const auto& [key, doc] : docs) out.push_back({key, kv.at(key), doc});
  return out;
}

}  // namespace invlab::exp
