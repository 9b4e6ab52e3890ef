#include "deformclass/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "deformclass/error.hpp"

namespace deformclass::io {

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void put_be32(Bytes& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint8_t to_byte(double v) {
  const double c = std::clamp(std::round(255.0 * v), 0.0, 255.0);
  return static_cast<std::uint8_t>(c);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

IdxFile parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 0 || bytes[1] != 0)
    throw Error(ErrorCode::BadMagic, "IDX magic must start with two zero bytes");
  IdxFile f;
  f.type_code = bytes[2];
  if (f.type_code != 0x08) throw Error(ErrorCode::BadMagic, "only unsigned byte IDX data is supported");
  const std::size_t rank = bytes[3];
  if (bytes.size() < 4 + 4 * rank) throw Error(ErrorCode::TruncatedPayload, "IDX header is truncated");
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    f.dims.push_back(read_be32(bytes, 4 + 4 * i));
    total *= f.dims.back();
  }
  const std::size_t start = 4 + 4 * rank;
  const std::size_t avail = bytes.size() - start;
  if (avail < total) throw Error(ErrorCode::TruncatedPayload, "IDX payload shorter than its dims");
  if (avail > total) throw Error(ErrorCode::DimMismatch, "IDX payload longer than its dims");
  f.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end());
  return f;
}

Bytes serialize_idx(const IdxFile& f) {
  Bytes out = {0, 0, f.type_code, static_cast<std::uint8_t>(f.dims.size())};
  for (auto d : f.dims) put_be32(out, d);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

std::vector<GrayImage> parse_idx_images(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && bytes[3] != 3)
    throw Error(ErrorCode::BadMagic, "image IDX files have magic 0x00000803");
  const IdxFile f = parse_idx(bytes);
  const std::uint32_t n = f.dims[0], rows = f.dims[1], cols = f.dims[2];
  if (rows != cols) throw Error(ErrorCode::DimMismatch, "only square images are supported");
  std::vector<GrayImage> out;
  out.reserve(n);
  const std::size_t per = static_cast<std::size_t>(rows) * cols;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::vector<double> px(per);
    for (std::size_t p = 0; p < per; ++p) px[p] = f.payload[i * per + p] / 255.0;
    out.emplace_back(static_cast<int>(rows), std::move(px));
  }
  return out;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && bytes[3] != 1)
    throw Error(ErrorCode::BadMagic, "label IDX files have magic 0x00000801");
  const IdxFile f = parse_idx(bytes);
  return {f.payload.begin(), f.payload.end()};
}

Bytes images_to_idx(std::span<const GrayImage> imgs) {
  IdxFile f;
  const auto side = static_cast<std::uint32_t>(imgs.empty() ? 0 : imgs.front().d());
  f.dims = {static_cast<std::uint32_t>(imgs.size()), side, side};
  for (const auto& img : imgs) {
    if (static_cast<std::uint32_t>(img.d()) != side)
      throw Error(ErrorCode::DimMismatch, "all images must share one size");
    for (double v : img.pixels()) f.payload.push_back(to_byte(v));
  }
  return serialize_idx(f);
}

Bytes labels_to_idx(std::span<const int> labels) {
  IdxFile f;
  f.dims = {static_cast<std::uint32_t>(labels.size())};
  for (int l : labels) {
    if (l < 0 || l > 255) throw Error(ErrorCode::DimMismatch, "labels must fit in one byte");
    f.payload.push_back(static_cast<std::uint8_t>(l));
  }
  return serialize_idx(f);
}

Bytes write_pgm(const GrayImage& img, PgmScale policy, bool* all_zero) {
  const int d = img.d();
  const std::string header = "P5\n" + std::to_string(d) + " " + std::to_string(d) + "\n255\n";
  Bytes out(header.begin(), header.end());
  double scale = 1.0;
  if (policy == PgmScale::PerImageMax) scale = img.max_value();
  const bool zero = !(scale > 0.0);
  if (all_zero) *all_zero = zero && policy == PgmScale::PerImageMax;
  for (double v : img.pixels()) out.push_back(zero ? 0 : to_byte(v / scale));
  return out;
}

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    int v = 0;
    const char* first = reinterpret_cast<const char*>(bytes.data()) + pos;
    const char* last = reinterpret_cast<const char*>(bytes.data()) + bytes.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || v < 0) throw Error(ErrorCode::BadMagic, "malformed PGM header");
    pos += static_cast<std::size_t>(ptr - first);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    throw Error(ErrorCode::BadMagic, "not a binary PGM (P5) file");
  pos = 2;
  const int w = number(), h = number(), maxval = number();
  if (maxval < 1 || maxval > 255) throw Error(ErrorCode::BadMagic, "only 8-bit PGM is supported");
  if (w != h) throw Error(ErrorCode::DimMismatch, "only square PGM images are supported");
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + n) throw Error(ErrorCode::TruncatedPayload, "PGM raster is truncated");
  std::vector<double> px(n);
  for (std::size_t i = 0; i < n; ++i) px[i] = bytes[pos + i] / 255.0;
  return GrayImage(w, std::move(px));
}

Bytes read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::TruncatedPayload, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorCode::TruncatedPayload, "failed writing " + path);
}

std::string manifest_csv(const datagen::Dataset& ds, const std::string& file_prefix) {
  std::ostringstream os;
  os << "index,label,template_index,eta,xi,xi_prime,tau,tau_prime,file\n";
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& it = ds.items[i];
    os << i << ',' << it.label << ',' << it.template_index << ',' << fmt(it.params.eta) << ','
       << fmt(it.params.xi) << ',' << fmt(it.params.xi_prime) << ',' << fmt(it.params.tau) << ','
       << fmt(it.params.tau_prime) << ',' << file_prefix << i << ".pgm\n";
  }
  return os.str();
}

std::vector<ManifestRow> parse_manifest(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::BadManifest, "manifest is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "index,label,template_index,eta,xi,xi_prime,tau,tau_prime,file")
    throw Error(ErrorCode::BadManifest, "unexpected manifest header");
  std::vector<ManifestRow> rows;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw Error(ErrorCode::BadManifest, "row needs 9 fields: " + line);
    try {
      ManifestRow r;
      std::size_t used = 0;
      auto as_int = [&](const std::string& s) {
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      auto as_dbl = [&](const std::string& s) {
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      r.index = as_int(cells[0]);
      r.label = as_int(cells[1]);
      r.template_index = as_int(cells[2]);
      r.params.eta = as_dbl(cells[3]);
      r.params.xi = as_dbl(cells[4]);
      r.params.xi_prime = as_dbl(cells[5]);
      r.params.tau = as_dbl(cells[6]);
      r.params.tau_prime = as_dbl(cells[7]);
      r.file = cells[8];
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::BadManifest, "malformed manifest row: " + line);
    }
  }
  return rows;
}

void write_dataset(const std::string& dir, const datagen::Dataset& ds, PgmScale policy) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  const std::string csv = manifest_csv(ds);
  write_file((base / "manifest.csv").string(), Bytes(csv.begin(), csv.end()));
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    write_file((base / ("img_" + std::to_string(i) + ".pgm")).string(),
               write_pgm(ds.items[i].image, policy));
}

MnistSet load_mnist(const std::string& images_path, const std::string& labels_path) {
  MnistSet s;
  s.images = parse_idx_images(read_file(images_path));
  s.labels = parse_idx_labels(read_file(labels_path));
  if (s.images.size() != s.labels.size())
    throw Error(ErrorCode::DimMismatch, "image and label counts differ");
  return s;
}

}  // namespace deformclass::io
