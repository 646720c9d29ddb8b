#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "invlab/data/bases.hpp"

namespace fs = std::filesystem;

namespace invlab::data {

namespace {

std::vector<std::uint8_t> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t le(std::span<const std::uint8_t> b, std::size_t off, int bytes) {
  if (off + static_cast<std::size_t>(bytes) > b.size()) throw std::runtime_error("zip: read past end");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
  return v;
}

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw std::runtime_error("zlib init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || zs.total_out != expected) throw std::runtime_error("zip: inflate failed");
  return out;
}

}  // namespace

std::size_t NpyArray::count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::vector<std::int64_t> NpyArray::as_int64() const {
  const std::size_t n = count();
  std::vector<std::int64_t> out(n);
  const char kind = dtype.size() >= 2 ? dtype[1] : '?';
  const int width = dtype.size() >= 3 ? std::stoi(dtype.substr(2)) : 0;
  if (dtype[0] == '>' && width > 1) throw std::runtime_error("big-endian npy arrays are not supported");
  if ((kind != 'i' && kind != 'u') || bytes.size() != n * static_cast<std::size_t>(width))
    throw std::runtime_error("npy dtype " + dtype + " is not an integer array");
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v = le(bytes, i * static_cast<std::size_t>(width), width);
    if (kind == 'i' && width < 8 && (v >> (8 * width - 1)) != 0) v |= ~0ULL << (8 * width);  // sign extend
    out[i] = static_cast<std::int64_t>(v);
  }
  return out;
}

NpyArray parse_npy(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
  if (b.size() < 10 || !std::equal(std::begin(kMagic), std::end(kMagic), b.begin()))
    throw std::runtime_error("not an npy buffer");
  const int major = b[6];
  const std::size_t header_len = major == 1 ? le(b, 8, 2) : le(b, 8, 4);
  const std::size_t header_start = major == 1 ? 10 : 12;
  const std::string header(reinterpret_cast<const char*>(b.data()) + header_start, header_len);

  NpyArray arr;
  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('descr'\s*:\s*'([^']+)')")))
    throw std::runtime_error("npy header without descr");
  arr.dtype = m[1];
  if (std::regex_search(header, m, std::regex(R"('fortran_order'\s*:\s*True)")))
    throw std::runtime_error("fortran-ordered npy arrays are not supported");
  if (!std::regex_search(header, m, std::regex(R"('shape'\s*:\s*\(([^)]*)\))")))
    throw std::runtime_error("npy header without shape");
  std::istringstream dims(m[1].str());
  std::string tok;
  while (std::getline(dims, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (!tok.empty()) arr.shape.push_back(std::stoull(tok));
  }
  const std::size_t data_start = header_start + header_len;
  arr.bytes.assign(b.begin() + static_cast<std::ptrdiff_t>(data_start), b.end());
  return arr;
}

std::map<std::string, std::vector<std::uint8_t>> read_zip(const fs::path& path) {
  const std::vector<std::uint8_t> buf = slurp(path);
  const std::span<const std::uint8_t> b(buf);
  // End of central directory: scan back over a possible comment.
  std::size_t eocd = std::string::npos;
  for (std::size_t i = b.size() >= 22 ? b.size() - 22 : 0;; --i) {
    if (le(b, i, 4) == 0x06054b50) {
      eocd = i;
      break;
    }
    if (i == 0 || b.size() - i > 22 + 65535) break;
  }
  if (eocd == std::string::npos) throw std::runtime_error(path.string() + " is not a zip archive");
  std::uint64_t entries = le(b, eocd + 10, 2);
  std::uint64_t cd_offset = le(b, eocd + 16, 4);
  if (eocd >= 20 && le(b, eocd - 20, 4) == 0x07064b50) {
    const std::uint64_t z64 = le(b, eocd - 20 + 8, 8);
    if (le(b, z64, 4) != 0x06064b50) throw std::runtime_error("zip64 end record missing");
    entries = le(b, z64 + 32, 8);
    cd_offset = le(b, z64 + 48, 8);
  }

  std::map<std::string, std::vector<std::uint8_t>> out;
  std::size_t p = cd_offset;
  for (std::uint64_t e = 0; e < entries; ++e) {
    if (le(b, p, 4) != 0x02014b50) throw std::runtime_error("corrupt zip central directory");
    const auto method = le(b, p + 10, 2);
    std::uint64_t comp = le(b, p + 20, 4);
    std::uint64_t uncomp = le(b, p + 24, 4);
    const auto name_len = le(b, p + 28, 2);
    const auto extra_len = le(b, p + 30, 2);
    const auto comment_len = le(b, p + 32, 2);
    std::uint64_t local = le(b, p + 42, 4);
    const std::string name(reinterpret_cast<const char*>(b.data()) + p + 46, name_len);
    // zip64 extended information
    std::size_t x = p + 46 + name_len;
    const std::size_t x_end = x + extra_len;
    while (x + 4 <= x_end) {
      const auto id = le(b, x, 2);
      const auto sz = le(b, x + 2, 2);
      if (id == 0x0001) {
        std::size_t q = x + 4;
        if (uncomp == 0xffffffff) { uncomp = le(b, q, 8); q += 8; }
        if (comp == 0xffffffff) { comp = le(b, q, 8); q += 8; }
        if (local == 0xffffffff) { local = le(b, q, 8); }
      }
      x += 4 + sz;
    }
    if (le(b, local, 4) != 0x04034b50) throw std::runtime_error("corrupt zip local header");
    const std::size_t data = local + 30 + le(b, local + 26, 2) + le(b, local + 28, 2);
    if (data + comp > b.size()) throw std::runtime_error("zip entry past end of file");
    const auto payload = b.subspan(data, comp);
    if (method == 0)
      out[name] = std::vector<std::uint8_t>(payload.begin(), payload.end());
    else if (method == 8)
      out[name] = inflate_raw(payload, uncomp);
    else
      throw std::runtime_error("unsupported zip compression method " + std::to_string(method));
    p += 46 + name_len + extra_len + comment_len;
  }
  return out;
}

NpyArray read_npz_array(const fs::path& path, const std::string& entry) {
  auto entries = read_zip(path);
  if (entries.empty()) throw std::runtime_error(path.string() + " has no arrays");
  if (entry.empty()) return parse_npy(entries.begin()->second);
  auto it = entries.find(entry);
  if (it == entries.end()) it = entries.find(entry + ".npy");
  if (it == entries.end()) throw std::runtime_error(path.string() + " has no array " + entry);
  return parse_npy(it->second);
}

Image read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto token = [&] {
    std::string t;
    while (in >> t) {
      if (t[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return t;
    }
    throw std::runtime_error("truncated PPM header in " + path.string());
  };
  if (token() != "P6") throw std::runtime_error(path.string() + " is not a binary PPM");
  const int w = std::stoi(token());
  const int h = std::stoi(token());
  const int maxval = std::stoi(token());
  if (maxval != 255) throw std::runtime_error("only 8-bit PPM files are supported");
  in.get();
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  if (!in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size())))
    throw std::runtime_error("truncated PPM data in " + path.string());
  return Image(ImageShape{h, w, 3}, std::move(px));
}

Image resize_bilinear(ImageView x, int height, int width) {
  Image out(ImageShape{height, width, x.channels()});
  const double sy = static_cast<double>(x.height()) / height;
  const double sx = static_cast<double>(x.width()) / width;
  for (int i = 0; i < height; ++i) {
    // half-pixel centres, clamped at the border
    const double fy = std::clamp((i + 0.5) * sy - 0.5, 0.0, static_cast<double>(x.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, x.height() - 1);
    const double ty = fy - y0;
    for (int j = 0; j < width; ++j) {
      const double fx = std::clamp((j + 0.5) * sx - 0.5, 0.0, static_cast<double>(x.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, x.width() - 1);
      const double tx = fx - x0;
      for (int c = 0; c < x.channels(); ++c) {
        const double v = (1 - ty) * ((1 - tx) * x.at(y0, x0, c) + tx * x.at(y0, x1, c)) +
                         ty * ((1 - tx) * x.at(y1, x0, c) + tx * x.at(y1, x1, c));
        out.at(i, j, c) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

LabeledImageDataset from_npz(const fs::path& images, const fs::path& labels, const std::string& split) {
  const NpyArray imgs = read_npz_array(images);
  const NpyArray lbls = read_npz_array(labels);
  if (imgs.shape.size() != 3 || (imgs.dtype != "|u1" && imgs.dtype != "<u1"))
    throw std::runtime_error(images.string() + ": expected uint8 array of shape (N, H, W)");
  const std::vector<std::int64_t> y = lbls.as_int64();
  if (y.size() != imgs.shape[0]) throw std::runtime_error("K49 image/label counts differ");
  const ImageShape shape{static_cast<int>(imgs.shape[1]), static_cast<int>(imgs.shape[2]), 1};
  const int classes = static_cast<int>(*std::max_element(y.begin(), y.end()) + 1);
  LabeledImageDataset ds(shape, std::max(classes, 49), DatasetMetadata{"k49", split, 0, {}});
  ds.reserve(y.size());
  const std::size_t stride = shape.pixels();
  for (std::size_t i = 0; i < y.size(); ++i)
    ds.add(ImageView(shape, std::span<const std::uint8_t>(imgs.bytes).subspan(i * stride, stride)),
           static_cast<int>(y[i]));
  return ds;
}

// CIFAR binary records: [label bytes][3072 bytes CHW].
void append_cifar(LabeledImageDataset& ds, const fs::path& file, int label_bytes, int label_index) {
  const std::vector<std::uint8_t> buf = slurp(file);
  const std::size_t rec = static_cast<std::size_t>(label_bytes) + 3072;
  if (buf.size() % rec != 0) throw std::runtime_error(file.string() + " is not a CIFAR binary batch");
  Image img(ImageShape{32, 32, 3});
  for (std::size_t off = 0; off < buf.size(); off += rec) {
    const int label = buf[off + static_cast<std::size_t>(label_index)];
    const std::uint8_t* chw = buf.data() + off + label_bytes;
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) img.at(i, j, c) = chw[(c * 32 + i) * 32 + j];
    ds.add(img, label);
  }
}

fs::path first_existing(const fs::path& dir, std::initializer_list<const char*> subdirs, const char* probe) {
  for (const char* s : subdirs)
    if (fs::exists(dir / s / probe)) return dir / s;
  if (fs::exists(dir / probe)) return dir;
  throw std::runtime_error("cannot find " + std::string(probe) + " under " + dir.string());
}

std::vector<std::string> split_semicolons(const std::string& line) {
  std::vector<std::string> f;
  std::istringstream is(line);
  std::string t;
  while (std::getline(is, t, ';')) f.push_back(t);
  return f;
}

}  // namespace

DatasetSplits read_k49(const fs::path& dir) {
  return {from_npz(dir / "k49-train-imgs.npz", dir / "k49-train-labels.npz", "train"),
          from_npz(dir / "k49-test-imgs.npz", dir / "k49-test-labels.npz", "test"), std::nullopt};
}

DatasetSplits read_cifar10(const fs::path& dir) {
  const fs::path root = first_existing(dir, {"cifar-10-batches-bin"}, "test_batch.bin");
  LabeledImageDataset train(ImageShape{32, 32, 3}, 10, DatasetMetadata{"cifar10", "train", 0, {}});
  for (int b = 1; b <= 5; ++b) append_cifar(train, root / ("data_batch_" + std::to_string(b) + ".bin"), 1, 0);
  LabeledImageDataset test(ImageShape{32, 32, 3}, 10, DatasetMetadata{"cifar10", "test", 0, {}});
  append_cifar(test, root / "test_batch.bin", 1, 0);
  return {std::move(train), std::move(test), std::nullopt};
}

DatasetSplits read_cifar100(const fs::path& dir) {
  const fs::path root = first_existing(dir, {"cifar-100-binary"}, "test.bin");
  LabeledImageDataset train(ImageShape{32, 32, 3}, 100, DatasetMetadata{"cifar100", "train", 0, {}});
  append_cifar(train, root / "train.bin", 2, 1);
  LabeledImageDataset test(ImageShape{32, 32, 3}, 100, DatasetMetadata{"cifar100", "test", 0, {}});
  append_cifar(test, root / "test.bin", 2, 1);
  return {std::move(train), std::move(test), std::nullopt};
}

DatasetSplits read_gtsrb(const fs::path& dir, std::uint64_t val_seed) {
  const fs::path root = fs::exists(dir / "GTSRB") ? dir / "GTSRB" : dir;
  const fs::path train_dir = root / "Final_Training" / "Images";
  if (!fs::exists(train_dir)) throw std::runtime_error("cannot find " + train_dir.string());
  constexpr int kSide = 32;
  const ImageShape shape{kSide, kSide, 3};

  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(train_dir))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  LabeledImageDataset all(shape, 43, DatasetMetadata{"gtsrb", "train", 0, {}});
  for (const auto& cdir : class_dirs) {
    const int label = std::stoi(cdir.filename().string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cdir))
      if (e.path().extension() == ".ppm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) all.add(resize_bilinear(read_ppm(f), kSide, kSide), label);
  }

  fs::path test_dir = root / "Final_Test" / "Images";
  fs::path gt = test_dir / "GT-final_test.csv";
  if (!fs::exists(gt)) gt = root / "GT-final_test.csv";
  if (!fs::exists(gt)) gt = dir / "GT-final_test.csv";
  LabeledImageDataset test(shape, 43, DatasetMetadata{"gtsrb", "test", 0, {}});
  std::ifstream csv(gt);
  if (!csv) throw std::runtime_error("cannot find GT-final_test.csv for GTSRB test labels");
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_semicolons(line);
    test.add(resize_bilinear(read_ppm(test_dir / f.front()), kSide, kSide), std::stoi(f.back()));
  }

  auto [train, val] = split_holdout(all, 0.25, val_seed);
  train.metadata().split = "train";
  val.metadata().split = "val";
  return {std::move(train), std::move(test), std::move(val)};
}

}  // namespace invlab::data
