#include <png.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "invlab/data/io.hpp"

namespace fs = std::filesystem;

namespace invlab::data {

void write_png(const fs::path& path, ImageView image) {
  if (image.channels() != 1 && image.channels() != 3)
    throw std::invalid_argument("PNG writer supports 1 or 3 channels");
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = image.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (png_image_write_to_file(&img, path.c_str(), 0, image.data().data(), 0, nullptr) == 0)
    throw std::runtime_error("failed to write " + path.string() + ": " + img.message);
}

Image read_png(const fs::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&img, path.c_str()) == 0)
    throw std::runtime_error("failed to read " + path.string() + ": " + img.message);
  const bool gray = (img.format & PNG_FORMAT_FLAG_COLOR) == 0;
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const ImageShape shape{static_cast<int>(img.height), static_cast<int>(img.width), gray ? 1 : 3};
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr) == 0) {
    png_image_free(&img);
    throw std::runtime_error("failed to decode " + path.string() + ": " + img.message);
  }
  return Image(shape, std::move(buf));
}

std::string encode_transform(const nuisance::TransformParams& p) {
  using namespace nuisance;
  if (const auto* r = std::get_if<RotationParams>(&p)) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "rotation:%.17g", r->angle);
    return buf.data();
  }
  if (const auto* b = std::get_if<BackgroundParams>(&p)) return "background:" + std::to_string(b->level);
  if (const auto* m = std::get_if<MorphologyParams>(&p))
    return std::string(m->op == MorphOp::dilate ? "dilate:" : "erode:") + std::to_string(m->kernel);
  return "identity";
}

nuisance::TransformParams decode_transform(const std::string& s) {
  using namespace nuisance;
  if (s == "identity") return IdentityParams{};
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("bad transform field '" + s + "'");
  const std::string kind = s.substr(0, colon);
  const std::string value = s.substr(colon + 1);
  if (kind == "rotation") return RotationParams{std::stod(value)};
  if (kind == "background") return BackgroundParams{std::stoi(value)};
  if (kind == "dilate") return MorphologyParams{MorphOp::dilate, std::stoi(value)};
  if (kind == "erode") return MorphologyParams{MorphOp::erode, std::stoi(value)};
  throw std::invalid_argument("bad transform field '" + s + "'");
}

namespace {

std::string image_name(std::size_t i) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%08zu.png", i);
  return buf.data();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return nlohmann::json::parse(in);
}

}  // namespace

void write_portable_split(const fs::path& dir, const LabeledImageDataset& ds) {
  fs::create_directories(dir / "images");
  std::ofstream csv(dir / "labels.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "labels.csv").string());
  csv << "file,label,id,transform\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::string name = image_name(i);
    write_png(dir / "images" / name, ds.image(i));
    csv << "images/" << name << ',' << ds.label(i) << ',' << ds.id(i) << ','
        << (ds.has_transform_params() ? encode_transform(ds.transform_params(i)) : "") << '\n';
  }
}

LabeledImageDataset read_portable_split(const fs::path& dir, int num_classes, const std::string& name,
                                        const std::string& split) {
  std::ifstream csv(dir / "labels.csv");
  if (!csv) throw std::runtime_error("cannot open " + (dir / "labels.csv").string());
  std::string line;
  std::getline(csv, line);  // header
  std::optional<LabeledImageDataset> ds;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 2) throw std::runtime_error("malformed row in " + (dir / "labels.csv").string());
    Image img = read_png(dir / f[0]);
    if (!ds) ds.emplace(img.shape(), num_classes, DatasetMetadata{name, split, 0, {}});
    const int label = std::stoi(f[1]);
    const std::uint64_t id = f.size() > 2 && !f[2].empty() ? std::stoull(f[2]) : ds->size();
    if (f.size() > 3 && !f[3].empty())
      ds->add(img, label, id, decode_transform(f[3]));
    else
      ds->add(img, label, id);
  }
  if (!ds) throw std::runtime_error("split " + dir.string() + " is empty");
  return std::move(*ds);
}

void write_portable(const fs::path& dir, const DatasetSplits& splits, const nlohmann::json& extra) {
  fs::create_directories(dir);
  nlohmann::json manifest = extra.is_object() ? extra : nlohmann::json::object();
  const auto& tr = splits.train;
  manifest["name"] = tr.metadata().name;
  manifest["num_classes"] = tr.num_classes();
  manifest["shape"] = {tr.shape().height, tr.shape().width, tr.shape().channels};
  manifest["format"] = "invlab.portable.v1";
  auto put = [&](const LabeledImageDataset& ds, const std::string& split) {
    write_portable_split(dir / split, ds);
    manifest["splits"][split] = {{"count", ds.size()}, {"class_sizes", ds.class_sizes()},
                                 {"seed", ds.metadata().seed}, {"info", ds.metadata().info}};
  };
  put(splits.train, "train");
  put(splits.test, "test");
  if (splits.val) put(*splits.val, "val");
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

bool is_portable_layout(const fs::path& dir) {
  return fs::exists(dir / "manifest.json") && fs::exists(dir / "train" / "labels.csv");
}

DatasetSplits read_portable(const fs::path& dir) {
  const nlohmann::json manifest = read_json(dir / "manifest.json");
  const int c = manifest.at("num_classes").get<int>();
  const std::string name = manifest.value("name", dir.filename().string());
  auto load = [&](const std::string& split) {
    LabeledImageDataset ds = read_portable_split(dir / split, c, name, split);
    if (manifest.contains("splits") && manifest["splits"].contains(split)) {
      const auto& s = manifest["splits"][split];
      ds.metadata().seed = s.value("seed", std::uint64_t{0});
      if (s.contains("info")) ds.metadata().info = s["info"];
    }
    return ds;
  };
  DatasetSplits out{load("train"), load("test"), std::nullopt};
  if (fs::exists(dir / "val" / "labels.csv")) out.val = load("val");
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<char, 8> kPackedMagic{'I', 'N', 'V', 'L', 'D', 'S', '0', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw std::runtime_error("truncated packed dataset");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_packed(const fs::path& path, const LabeledImageDataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kPackedMagic.data(), kPackedMagic.size());
  put_u32(os, static_cast<std::uint32_t>(ds.shape().height));
  put_u32(os, static_cast<std::uint32_t>(ds.shape().width));
  put_u32(os, static_cast<std::uint32_t>(ds.shape().channels));
  put_u32(os, static_cast<std::uint32_t>(ds.size()));
  os.write(reinterpret_cast<const char*>(ds.pixels().data()), static_cast<std::streamsize>(ds.pixels().size()));
  for (int y : ds.labels()) put_u32(os, static_cast<std::uint32_t>(y));
}

LabeledImageDataset read_packed(const fs::path& path, int num_classes) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (magic != kPackedMagic) throw std::runtime_error(path.string() + " is not a packed invlab dataset");
  const ImageShape shape{static_cast<int>(get_u32(is)), static_cast<int>(get_u32(is)), static_cast<int>(get_u32(is))};
  const std::uint32_t n = get_u32(is);
  std::vector<std::uint8_t> pixels(shape.pixels() * n);
  if (!is.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size())))
    throw std::runtime_error("truncated packed dataset " + path.string());
  std::vector<int> labels(n);
  int max_label = -1;
  for (auto& y : labels) {
    y = static_cast<int>(get_u32(is));
    max_label = std::max(max_label, y);
  }
  LabeledImageDataset ds(shape, num_classes > 0 ? num_classes : max_label + 1,
                         DatasetMetadata{path.stem().string(), "", 0, {}});
  ds.reserve(n);
  const std::size_t stride = shape.pixels();
  for (std::uint32_t i = 0; i < n; ++i)
    ds.add(ImageView(shape, std::span<const std::uint8_t>(pixels).subspan(i * stride, stride)), labels[i]);
  return ds;
}

}  // namespace invlab::data
