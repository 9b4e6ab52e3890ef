#include <doctest.h>

#include <cmath>
#include <random>

#include "deformclass/cnn.hpp"
#include "deformclass/error.hpp"
#include "oracles.hpp"

using namespace deformclass;

namespace {

cnn::Filter make_filter(std::vector<double> w, int size) {
  cnn::Filter f;
  f.size = size;
  f.w = std::move(w);
  return f;
}

GrayImage shift_image(const GrayImage& img, int dr, int dc) {
  GrayImage out(img.d());
  for (int r = 0; r < img.d(); ++r)
    for (int c = 0; c < img.d(); ++c) {
      const int rr = r - dr, cc = c - dc;
      if (rr >= 0 && cc >= 0 && rr < img.d() && cc < img.d()) out.at(r, c) = img.at(rr, cc);
    }
  return out;
}

DeformParams params(double eta, double xi, double xip, double tau, double taup) {
  DeformParams p;
  p.eta = eta;
  p.xi = xi;
  p.xi_prime = xip;
  p.tau = tau;
  p.tau_prime = taup;
  return p;
}

}  // namespace

TEST_CASE("quadratic support") {
  std::vector<double> m(36, 0.0);
  CHECK(cnn::quadratic_support(m, 6).is_null());
  m[2 * 6 + 1] = 1.0;
  m[3 * 6 + 4] = 2.0;
  const auto f = cnn::quadratic_support(m, 6);
  REQUIRE(f.size == 4);
  CHECK(f.at(0, 0) == 1.0);
  CHECK(f.at(1, 3) == 2.0);
  // a wide box near the bottom edge is shifted back inside the matrix
  std::vector<double> e(36, 0.0);
  e[5 * 6 + 0] = 1.0;
  e[5 * 6 + 5] = 1.0;
  const auto g = cnn::quadratic_support(e, 6);
  REQUIRE(g.size == 6);
  CHECK(g.at(5, 0) == 1.0);
  CHECK(g.at(5, 5) == 1.0);
}

TEST_CASE("feature_max equals one for a matched filter") {
  const auto img = normalize_l2(rasterize(TemplateFunction::cross(0.2, 0.07), params(1, 1.2, 1.1, 0.1, 0.0), 32));
  auto f = cnn::quadratic_support(img.pixels(), 32);
  double s = 0;
  for (double v : f.w) s += v * v;
  for (double& v : f.w) v /= std::sqrt(s);
  CHECK(cnn::feature_max(f, img) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cnn::feature_max(f, GrayImage(32)) == 0.0);
}

TEST_CASE("feature_max equals the shift-max double sum") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> val(0, 9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(64), w(9);
    for (auto& v : x) v = val(rng);
    for (auto& v : w) v = val(rng);
    GrayImage img(8, x);
    CHECK(cnn::feature_max(make_filter(w, 3), img) == oracle::shift_max(w, 3, x, 8));
  }
}

TEST_CASE("negative filter entries are cut by the ReLU") {
  GrayImage img(4);
  img.at(1, 1) = 1.0;
  CHECK(cnn::feature_max(make_filter({-1, -1, -1, -1}, 2), img) == 0.0);
  CHECK(cnn::feature_max(make_filter({-1, 2, -1, -1}, 2), img) == 2.0);
}

TEST_CASE("feature_max is invariant under in-frame shifts") {
  const auto img = rasterize(TemplateFunction::tent(0.15), {}, 32);
  const auto f = make_filter({0.1, 0.5, 0.2, 0.3, 1.0, 0.3, 0.2, 0.5, 0.1}, 3);
  const double base = cnn::feature_max(f, img);
  for (auto [dr, dc] : {std::pair{2, -3}, {-5, 4}, {6, 6}}) CHECK(cnn::feature_max(f, shift_image(img, dr, dc)) == base);
}

TEST_CASE("feature_max rejects an oversized filter") {
  try {
    cnn::feature_max(make_filter(std::vector<double>(25, 1.0), 5), GrayImage(4));
    FAIL("expected FilterTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FilterTooLarge);
  }
}

TEST_CASE("max tree") {
  CHECK(cnn::max_tree(std::vector<double>{0.2, 0.7, 0.5}) == 0.7);
  CHECK(cnn::max_tree(std::vector<double>{0.3}) == 0.3);
  CHECK_THROWS_AS(cnn::max_tree(std::vector<double>{}), Error);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> v(17);
    for (auto& x : v) x = u(rng);
    CHECK(cnn::max_tree(v) == oracle::naive_max(v));
  }
}

TEST_CASE("softmax") {
  auto [a0, a1] = cnn::softmax_beta(0.3, 0.3, 5.0);
  CHECK(a0 == 0.5);
  CHECK(a1 == 0.5);
  auto [b0, b1] = cnn::softmax_beta(1.0, 0.0, 1.0);
  CHECK(b0 == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
  CHECK(b1 == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-15));
  CHECK(b0 + b1 == 1.0);
  double prev = 0.5;
  for (double beta : {1.0, 10.0, 100.0}) {
    const auto [p0, p1] = cnn::softmax_beta(0.6, 0.55, beta);
    CHECK(p0 > prev);
    CHECK(p1 > 0.0);
    CHECK(p0 + p1 == 1.0);
    prev = p0;
  }
  const auto [h0, h1] = cnn::softmax_beta(1000.0, -1000.0, 64.0);
  CHECK(h0 == 1.0);
  CHECK(h1 >= 0.0);
  CHECK_THROWS_AS(cnn::softmax_beta(0, 0, 0), Error);
}

TEST_CASE("filter bank layout") {
  const auto bank = cnn::build_filter_bank(TemplateFunction::tent(0.25), TemplateFunction::cone(0.25), 1, 4);
  CHECK(bank.filters.size() == 162);
  const auto big = cnn::build_filter_bank(TemplateFunction::tent(0.25), TemplateFunction::cross(0.25, 0.08), 1, 16);
  for (const auto& f : big.filters) {
    if (f.is_null()) continue;
    double s = 0;
    for (double v : f.w) s += v * v;
    CHECK(std::sqrt(s) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(big.non_null() > 0);
  CHECK(big.non_null() < big.filters.size());
}

TEST_CASE("unit-scale filter is the normalized sampled tent") {
  const int d = 16;
  const auto bank = cnn::build_filter_bank(TemplateFunction::tent(0.25), TemplateFunction::cone(0.25), 1, d);
  const cnn::Filter* unit = nullptr;
  for (const auto& f : bank.filters)
    if (f.k == 0 && f.xi == 1.0 && f.xi_prime == 1.0) unit = &f;
  REQUIRE(unit != nullptr);
  const auto ref = oracle::rasterize([](double x, double y) { return oracle::tent(0.25, 0.5, 0.5, x, y); }, 1, 1, 1, 0, 0, d);
  const double n = oracle::frobenius(ref);
  const auto crop = cnn::quadratic_support(ref, d);
  REQUIRE(crop.size == unit->size);
  for (std::size_t i = 0; i < crop.w.size(); ++i) CHECK(unit->w[i] == doctest::Approx(crop.w[i] / n).epsilon(1e-14));
}

TEST_CASE("explicit classifier agrees with the literal pipeline") {
  const int d = 16;
  auto bank = std::make_shared<const cnn::FilterBank>(
      cnn::build_filter_bank(TemplateFunction::tent(0.25), TemplateFunction::cross(0.25, 0.083333333333333333), 1, d));
  const cnn::ExplicitClassifier pruned(bank), full(bank, false);
  for (const auto& p : {params(1, 1, 1, 0, 0), params(0.9, 1.3, 1.1, 0.1, -0.05)}) {
    for (const auto& f : {TemplateFunction::tent(0.25), TemplateFunction::cross(0.25, 0.083333333333333333)}) {
      const auto img = normalize_l2(rasterize(f, p, d));
      double z[2] = {0, 0};
      for (const auto& filt : bank->filters)
        if (!filt.is_null()) z[filt.k] = std::max(z[filt.k], cnn::feature_max(filt, img));
      const auto a = pruned.classify(img, d), b = full.classify(img, d);
      CHECK(a.z0 == doctest::Approx(z[0]).epsilon(1e-12));
      CHECK(a.z1 == doctest::Approx(z[1]).epsilon(1e-12));
      CHECK(b.z0 == doctest::Approx(z[0]).epsilon(1e-12));
      CHECK(b.z1 == doctest::Approx(z[1]).epsilon(1e-12));
      CHECK(a.filters_evaluated <= b.filters_evaluated);
      CHECK(a.p0 + a.p1 == 1.0);
    }
  }
  const auto img = normalize_l2(rasterize(TemplateFunction::cross(0.25, 0.083333333333333333), {}, d));
  const auto feats = full.all_features(img, 1);
  std::size_t idx = 0;
  for (const auto& filt : bank->filters) {
    if (filt.k != 1) continue;
    CHECK(feats[idx] == doctest::Approx(filt.is_null() ? 0.0 : cnn::feature_max(filt, img)).epsilon(1e-12));
    ++idx;
  }
  CHECK_THROWS_AS(pruned.classify(normalize_l2(rasterize(TemplateFunction::tent(0.25), {}, 20)), 1.0), Error);
}

TEST_CASE("grid-aligned class-0 image is labelled 0") {
  const int d = 32;
  const auto bank = cnn::build_filter_bank(TemplateFunction::tent(0.25), TemplateFunction::cross(0.25, 0.083333333333333333), 2, d);
  const auto out = cnn::classify_explicit(bank, normalize_l2(rasterize(TemplateFunction::tent(0.25), {}, d)), d);
  CHECK(out.z0 >= out.z1);
  CHECK(out.z0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.label == 0);
}

TEST_CASE("identical templates tie") {
  const int d = 16;
  const auto f = TemplateFunction::cone(0.2);
  const auto bank = cnn::build_filter_bank(f, f, 1, d);
  const auto out = cnn::classify_explicit(bank, normalize_l2(rasterize(f, params(1, 1.2, 1.3, 0.1, 0.1), d)), d);
  CHECK(out.z0 == out.z1);
  CHECK(out.p0 == 0.5);
  CHECK(out.label == 0);
}

TEST_CASE("batch classification keeps input order") {
  const int d = 16;
  auto bank = std::make_shared<const cnn::FilterBank>(
      cnn::build_filter_bank(TemplateFunction::tent(0.25), TemplateFunction::cross(0.25, 0.083333333333333333), 1, d));
  const cnn::ExplicitClassifier clf(bank);
  std::vector<GrayImage> imgs;
  for (int i = 0; i < 6; ++i)
    imgs.push_back(normalize_l2(rasterize(i % 2 ? TemplateFunction::cross(0.25, 0.083333333333333333) : TemplateFunction::tent(0.25),
                                          params(1, 1 + 0.05 * i, 1.1, 0.02 * i, 0), d)));
  const auto outs = clf.classify_batch(imgs, d);
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const auto one = clf.classify(imgs[i], d);
    CHECK(outs[i].z0 == one.z0);
    CHECK(outs[i].z1 == one.z1);
  }
}
