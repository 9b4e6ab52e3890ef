#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "deformclass/datagen.hpp"
#include "deformclass/error.hpp"
#include "deformclass/io.hpp"

using namespace deformclass;
using io::Bytes;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ConfigError;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("deformclass_io_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("minimal IDX image file") {
  const Bytes b{0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 128, 0};
  const auto imgs = io::parse_idx_images(b);
  REQUIRE(imgs.size() == 1);
  CHECK(imgs[0].d() == 2);
  CHECK(imgs[0].at(0, 0) == 0.0);
  CHECK(imgs[0].at(0, 1) == 1.0);
  CHECK(imgs[0].at(1, 0) == doctest::Approx(128.0 / 255));
  CHECK(imgs[0].at(1, 1) == 0.0);
}

TEST_CASE("IDX errors") {
  const Bytes good{0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 255, 128, 0};
  Bytes trunc(good.begin(), good.end() - 1);
  CHECK(code_of([&] { io::parse_idx_images(trunc); }) == ErrorCode::TruncatedPayload);
  Bytes header_only(good.begin(), good.begin() + 10);
  CHECK(code_of([&] { io::parse_idx_images(header_only); }) == ErrorCode::TruncatedPayload);
  Bytes extra = good;
  extra.push_back(1);
  CHECK(code_of([&] { io::parse_idx_images(extra); }) == ErrorCode::DimMismatch);
  Bytes magic = good;
  magic[0] = 1;
  CHECK(code_of([&] { io::parse_idx_images(magic); }) == ErrorCode::BadMagic);
  Bytes type = good;
  type[2] = 0x0D;
  CHECK(code_of([&] { io::parse_idx_images(type); }) == ErrorCode::BadMagic);
  CHECK(code_of([&] { io::parse_idx_labels(good); }) == ErrorCode::BadMagic);
  const Bytes rect{0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 2, 7, 7};
  CHECK(code_of([&] { io::parse_idx_images(rect); }) == ErrorCode::DimMismatch);
}

TEST_CASE("IDX labels") {
  const Bytes b{0, 0, 8, 1, 0, 0, 0, 3, 0, 4, 7};
  CHECK(io::parse_idx_labels(b) == std::vector<int>{0, 4, 7});
  const Bytes empty{0, 0, 8, 1, 0, 0, 0, 0};
  CHECK(io::parse_idx_labels(empty).empty());
  CHECK(code_of([&] { io::parse_idx_labels(Bytes{0, 0, 8, 1, 0, 0, 0, 3, 0, 4}); }) == ErrorCode::TruncatedPayload);
}

TEST_CASE("IDX round trip and big-endian dims") {
  const Bytes b{0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0, 3, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 8, 7, 6, 5, 4, 3, 2, 1};
  const auto f = io::parse_idx(b);
  CHECK(f.dims == std::vector<std::uint32_t>{2, 3, 3});
  CHECK(io::serialize_idx(f) == b);
  CHECK(io::images_to_idx(io::parse_idx_images(b)) == b);
  const Bytes big{0, 0, 8, 1, 0, 0, 1, 0};
  Bytes with_payload = big;
  with_payload.resize(8 + 256, 3);
  CHECK(io::parse_idx(with_payload).dims[0] == 256);
  const std::vector<int> labels{1, 0, 255};
  CHECK(io::parse_idx_labels(io::labels_to_idx(labels)) == labels);
}

TEST_CASE("PGM export") {
  GrayImage one(1);
  one.at(0, 0) = 1.0;
  const std::string header = "P5\n1 1\n255\n";
  Bytes expect(header.begin(), header.end());
  expect.push_back(0xFF);
  CHECK(io::write_pgm(one, io::PgmScale::Fixed) == expect);

  bool all_zero = false;
  const auto z = io::write_pgm(GrayImage(2), io::PgmScale::PerImageMax, &all_zero);
  CHECK(all_zero);
  CHECK(z.size() == std::string("P5\n2 2\n255\n").size() + 4);
  for (std::size_t i = z.size() - 4; i < z.size(); ++i) CHECK(z[i] == 0);

  const auto tent = rasterize(TemplateFunction::tent(0.25), {}, 28);
  const auto pgm = io::write_pgm(tent);
  const std::string h28 = "P5\n28 28\n255\n";
  CHECK(std::string(pgm.begin(), pgm.begin() + static_cast<std::ptrdiff_t>(h28.size())) == h28);
  CHECK(pgm.size() == h28.size() + 784);

  // round trip reproduces pixels to 1/255 after undoing the per-image scale
  const auto back = io::read_pgm(pgm);
  const double mx = tent.max_value();
  for (int r = 0; r < 28; ++r)
    for (int c = 0; c < 28; ++c) CHECK(std::abs(back.at(r, c) - tent.at(r, c) / mx) <= 1.0 / 255 + 1e-12);
}

TEST_CASE("PGM reader") {
  const std::string text = "P5\n# comment\n2 2\n255\n";
  Bytes b(text.begin(), text.end());
  for (std::uint8_t v : {0, 51, 102, 255}) b.push_back(v);
  const auto img = io::read_pgm(b);
  CHECK(img.at(0, 1) == doctest::Approx(0.2));
  CHECK(img.at(1, 1) == 1.0);
  CHECK(code_of([&] { io::read_pgm(Bytes(b.begin(), b.end() - 1)); }) == ErrorCode::TruncatedPayload);
  CHECK(code_of([] { io::read_pgm(Bytes{'P', '2'}); }) == ErrorCode::BadMagic);
}

TEST_CASE("manifest round trip") {
  datagen::DeformDistribution q;
  q.eta_range = {0.8, 1.2};
  q.xi_range = {1.0, 1.5};
  q.xi_prime_range = {1.0, 1.5};
  q.seed = 3;
  const auto ds = datagen::generate_dataset({TemplateFunction::tent(0.25)}, {TemplateFunction::cone(0.25)}, q, 5, 0.5, 12);
  const auto csv = io::manifest_csv(ds);
  const auto rows = io::parse_manifest(csv);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].index == static_cast<int>(i));
    CHECK(rows[i].label == ds.items[i].label);
    CHECK(rows[i].params.eta == ds.items[i].params.eta);
    CHECK(rows[i].params.tau_prime == ds.items[i].params.tau_prime);
    CHECK(rows[i].file == "img_" + std::to_string(i) + ".pgm");
  }
  CHECK(code_of([] { io::parse_manifest("a,b\n"); }) == ErrorCode::BadManifest);
  CHECK(code_of([&] { io::parse_manifest(csv + "1,2,3\n"); }) == ErrorCode::BadManifest);
  CHECK(code_of([&] { io::parse_manifest(csv + "x,0,0,1,1,1,0,0,f.pgm\n"); }) == ErrorCode::BadManifest);

  const auto dir = scratch("ds");
  io::write_dataset(dir.string(), ds);
  CHECK(std::filesystem::exists(dir / "manifest.csv"));
  CHECK(std::filesystem::exists(dir / "img_4.pgm"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("MNIST pairing") {
  const auto dir = scratch("mnist");
  std::filesystem::create_directories(dir);
  GrayImage a(3), b(3);
  a.at(1, 1) = 1.0;
  b.at(0, 2) = 0.5;
  const std::vector<GrayImage> imgs{a, b};
  io::write_file((dir / "img").string(), io::images_to_idx(imgs));
  io::write_file((dir / "lab2").string(), io::labels_to_idx(std::vector<int>{4, 7}));
  io::write_file((dir / "lab3").string(), io::labels_to_idx(std::vector<int>{4, 7, 1}));
  const auto s = io::load_mnist((dir / "img").string(), (dir / "lab2").string());
  CHECK(s.images.size() == 2);
  CHECK(s.labels == std::vector<int>{4, 7});
  CHECK(s.images[1].at(0, 2) == doctest::Approx(128.0 / 255));
  CHECK(code_of([&] { io::load_mnist((dir / "img").string(), (dir / "lab3").string()); }) == ErrorCode::DimMismatch);
  std::filesystem::remove_all(dir);
}

TEST_CASE("real MNIST files when present") {
  const char* images = std::getenv("MNIST_TRAIN_IMAGES");
  const char* labels = std::getenv("MNIST_TRAIN_LABELS");
  if (!images || !labels) {
    MESSAGE("MNIST_TRAIN_IMAGES / MNIST_TRAIN_LABELS not set; skipping");
    return;
  }
  const auto s = io::load_mnist(images, labels);
  CHECK(s.images.size() == 60000);
  CHECK(s.images.front().d() == 28);
  CHECK(s.labels.size() == s.images.size());
}
