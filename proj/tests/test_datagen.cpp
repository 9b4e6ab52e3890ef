#include <doctest.h>

#include <cmath>

#include "deformclass/datagen.hpp"
#include "deformclass/error.hpp"
#include "oracles.hpp"

using namespace deformclass;
using datagen::DeformDistribution;

namespace {

DeformDistribution mild(std::uint64_t seed) {
  DeformDistribution q;
  q.eta_range = {0.8, 1.2};
  q.xi_range = {1.0, 1.5};
  q.xi_prime_range = {1.0, 1.5};
  q.seed = seed;
  return q;
}

bool same_image(const GrayImage& a, const GrayImage& b) { return a == b; }

}  // namespace

TEST_CASE("degenerate ranges force the values") {
  DeformDistribution q;
  q.seed = 11;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto p = datagen::sample_params(q, i);
    CHECK(p.eta == 1.0);
    CHECK(p.xi == 1.0);
    CHECK(p.xi_prime == 1.0);
    CHECK(p.tau >= -0.25);
    CHECK(p.tau <= 0.25);
    CHECK(p.tau_prime >= -0.25);
    CHECK(p.tau_prime <= 0.25);
  }
}

TEST_CASE("scale 2 shift range") {
  DeformDistribution q;
  q.xi_range = {2, 2};
  q.xi_prime_range = {2, 2};
  q.seed = 5;
  double lo = 1e9, hi = -1e9;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto p = datagen::sample_params(q, i);
    // the image model uses f(xi x - tau), so -tau lies in [-5/4, 1/4]
    CHECK(-p.tau >= -1.25);
    CHECK(-p.tau <= 0.25);
    lo = std::min(lo, -p.tau);
    hi = std::max(hi, -p.tau);
  }
  CHECK(lo < -1.2);
  CHECK(hi > 0.2);
}

TEST_CASE("sampling is a function of (seed, index)") {
  const auto q = mild(99);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto a = datagen::sample_params(q, i), b = datagen::sample_params(q, i);
    CHECK(a.eta == b.eta);
    CHECK(a.xi == b.xi);
    CHECK(a.tau == b.tau);
    CHECK(a.tau_prime == b.tau_prime);
  }
  CHECK(datagen::sample_params(q, 0).eta != datagen::sample_params(q, 1).eta);
}

TEST_CASE("invalid distributions") {
  auto bad = [](auto mutate) {
    DeformDistribution q;
    mutate(q);
    try {
      datagen::validate(q);
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidDistribution;
    }
    return false;
  };
  CHECK(bad([](auto& q) { q.eta_range = {0.0, 1.0}; }));
  CHECK(bad([](auto& q) { q.xi_range = {0.4, 1.0}; }));
  CHECK(bad([](auto& q) { q.xi_prime_range = {1.5, 1.0}; }));
  CHECK(bad([](auto& q) { q.flip_prob = 1.5; }));
}

TEST_CASE("flip sampling stays admissible") {
  auto q = mild(3);
  q.flip_prob = 0.5;
  int negative = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto p = datagen::sample_params(q, i);
    CHECK(is_admissible(p));
    negative += p.xi < 0;
  }
  CHECK(negative > 400);
  CHECK(negative < 600);
}

TEST_CASE("balanced design") {
  const std::vector<TemplateFunction> c0{TemplateFunction::tent(0.25)}, c1{TemplateFunction::cone(0.25)};
  const auto ds = datagen::generate_dataset(c0, c1, mild(1), 2, 0.5, 16);
  REQUIRE(ds.items.size() == 2);
  CHECK(ds.items[0].label + ds.items[1].label == 1);
  const auto big = datagen::generate_dataset(c0, c1, mild(2), 100, 0.5, 16);
  int ones = 0;
  for (const auto& it : big.items) {
    ones += it.label;
    CHECK(it.template_index == 0);
    CHECK(it.image.d() == 16);
  }
  CHECK(ones == 50);
  CHECK(big.meta.at("balanced") == "true");
}

TEST_CASE("Bernoulli labels within three sigma") {
  const std::vector<TemplateFunction> c0{TemplateFunction::tent(0.25)}, c1{TemplateFunction::cone(0.25)};
  const auto ds = datagen::generate_dataset(c0, c1, mild(8), 1000, 0.3, 8);
  int ones = 0;
  for (const auto& it : ds.items) ones += it.label;
  const double sigma = std::sqrt(1000 * 0.3 * 0.7);
  CHECK(std::abs(ones - 300.0) <= 3 * sigma);
}

TEST_CASE("multi-template draws use every template and the right raster") {
  const std::vector<TemplateFunction> c0{TemplateFunction::tent(0.2), TemplateFunction::tent(0.1, 0.4, 0.6),
                                         TemplateFunction::cone(0.15)};
  const std::vector<TemplateFunction> c1{TemplateFunction::cross(0.2, 0.05)};
  const auto ds = datagen::generate_dataset(c0, c1, mild(4), 300, 0.5, 24);
  std::vector<int> hits(3, 0);
  for (const auto& it : ds.items) {
    if (it.label == 0) ++hits[static_cast<std::size_t>(it.template_index)];
    const auto& f = it.label == 0 ? c0[static_cast<std::size_t>(it.template_index)] : c1[0];
    CHECK(same_image(it.image, rasterize(f, it.params, 24)));
  }
  for (int h : hits) CHECK(h > 20);
}

TEST_CASE("generation is deterministic") {
  const std::vector<TemplateFunction> c0{TemplateFunction::tent(0.25)}, c1{TemplateFunction::cone(0.25)};
  const auto a = datagen::generate_dataset(c0, c1, mild(77), 30, 0.5, 16);
  const auto b = datagen::generate_dataset(c0, c1, mild(77), 30, 0.5, 16);
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    CHECK(same_image(a.items[i].image, b.items[i].image));
    CHECK(a.items[i].label == b.items[i].label);
  }
  // item i only depends on (seed, i)
  const auto c = datagen::generate_dataset(c0, c1, mild(77), 10, 0.5, 16);
  for (std::size_t i = 0; i < c.items.size(); ++i) CHECK(same_image(a.items[i].image, c.items[i].image));
}

TEST_CASE("non-identifiable fixture") {
  DeformParams p;
  const auto fx = datagen::non_identifiable_fixture(16, p);
  CHECK(fx.delta == doctest::Approx(0.25));
  CHECK(fx.g(3.0 / 16, 5.0 / 16) == 0.0);
  for (int k = 0; k <= 16; ++k)
    for (int l = 0; l <= 16; ++l) CHECK(std::abs(fx.g(k / 16.0, l / 16.0)) <= 1e-15);

  // closed form of the perturbation norm: (d/2)^2 micro-tents with h = 1/(2d)
  for (int d : {8, 16}) {
    const auto f = datagen::non_identifiable_fixture(d, p);
    const double norm = std::sqrt(oracle::midpoint([&](double x, double y) { return f.g(x, y) * f.g(x, y); }, 2048));
    CHECK(norm == doctest::Approx(1.0 / (std::sqrt(192.0) * d)).epsilon(2e-3));
  }
}

TEST_CASE("fixture pixels agree under both classes") {
  DeformParams p;
  p.eta = 1.4;
  p.xi = 1.2;
  p.xi_prime = 0.9;
  p.tau = -0.1;
  p.tau_prime = 0.05;
  const auto fx = datagen::non_identifiable_fixture(16, p);
  const auto x1 = rasterize(fx.f1, DeformParams::identity(), 16);
  const auto x0 = rasterize(fx.f0, datagen::fixture_model_params(p), 16);
  for (std::size_t i = 0; i < x1.pixels().size(); ++i) CHECK(std::abs(x1.pixels()[i] - x0.pixels()[i]) <= 1e-12);
  // f1 really differs from the deformed f0 off the grid
  CHECK(fx.f1(0.25 + 1.0 / 32, 0.25 + 1.0 / 32) > 0.0);
}

TEST_CASE("fixture rejects bad input") {
  DeformParams p;
  CHECK_THROWS_AS(datagen::non_identifiable_fixture(10, p), Error);
  p.tau = 0.3;
  try {
    datagen::non_identifiable_fixture(16, p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFixtureParams);
  }
}
