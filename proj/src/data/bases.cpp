#include <cstdlib>
#include <stdexcept>

#include "invlab/data/bases.hpp"
#include "invlab/data/io.hpp"

namespace fs = std::filesystem;

namespace invlab::data {

BasePreset base_preset(const std::string& name) {
  if (name == "k49" || name == "glyph49") return {name, 49, DecayLaw::zipf(2.0), 4828, 5};
  if (name == "gtsrb") return {name, 43, DecayLaw::zipf(1.8), 1907, 5};
  if (name == "cifar10") return {name, 10, DecayLaw::exponential(100.0), 5000, 1};
  if (name == "cifar100") return {name, 100, DecayLaw::exponential(100.0), 500, 1};
  throw std::invalid_argument("unknown base dataset '" + name + "'");
}

fs::path default_data_root() {
  if (const char* env = std::getenv("INVLAB_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

DatasetSplits load_base(const std::string& name, const fs::path& root, const GlyphOptions& glyph) {
  if (name == "glyph49") return make_glyph_dataset(glyph);
  if (is_portable_layout(root)) return read_portable(root);
  const fs::path dir = root / name;
  if (is_portable_layout(dir)) return read_portable(dir);
  if (name == "k49") return read_k49(dir);
  if (name == "gtsrb") return read_gtsrb(dir);
  if (name == "cifar10") return read_cifar10(dir);
  if (name == "cifar100") return read_cifar100(dir);
  throw std::invalid_argument("unknown base dataset '" + name + "'");
}

}  // namespace invlab::data
