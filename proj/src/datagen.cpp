#include "deformclass/datagen.hpp"

#include <algorithm>
#include <sstream>

#include "deformclass/error.hpp"
#include "deformclass/parallel.hpp"
#include "deformclass/rng.hpp"

namespace deformclass::datagen {

namespace {

constexpr std::uint64_t kParamsSalt = 0x70617261ULL;  // "para"
constexpr std::uint64_t kItemSalt = 0x6974656dULL;    // "item"

std::string num_str(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string range_str(std::pair<double, double> r) {
  return num_str(r.first) + "," + num_str(r.second);
}

}  // namespace

void validate(const DeformDistribution& q) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidDistribution, what); };
  if (!(q.eta_range.first > 0.0) || q.eta_range.first > q.eta_range.second)
    bad("eta_range must satisfy 0 < lo <= hi");
  if (!(q.xi_range.first >= 0.5) || q.xi_range.first > q.xi_range.second)
    bad("xi_range must satisfy 1/2 <= lo <= hi");
  if (!(q.xi_prime_range.first >= 0.5) || q.xi_prime_range.first > q.xi_prime_range.second)
    bad("xi_prime_range must satisfy 1/2 <= lo <= hi");
  if (!(q.flip_prob >= 0.0 && q.flip_prob <= 1.0)) bad("flip_prob must lie in [0,1]");
}

DeformParams sample_params(const DeformDistribution& q, std::uint64_t draw_index) {
  validate(q);
  Rng rng(derive_seed(q.seed, {kParamsSalt, draw_index}));
  DeformParams p;
  p.allow_flips = q.flip_prob > 0.0;
  p.eta = rng.uniform(q.eta_range.first, q.eta_range.second);
  p.xi = rng.uniform(q.xi_range.first, q.xi_range.second);
  if (rng.bernoulli(q.flip_prob)) p.xi = -p.xi;
  p.xi_prime = rng.uniform(q.xi_prime_range.first, q.xi_prime_range.second);
  if (rng.bernoulli(q.flip_prob)) p.xi_prime = -p.xi_prime;
  auto [lo, hi] = model_shift_interval(p.xi);
  p.tau = rng.uniform(lo, hi);
  auto [lo2, hi2] = model_shift_interval(p.xi_prime);
  p.tau_prime = rng.uniform(lo2, hi2);
  return p;
}

Dataset generate_dataset(const std::vector<TemplateFunction>& templates_class0,
                         const std::vector<TemplateFunction>& templates_class1,
                         const DeformDistribution& q, int n, double pi, int d) {
  if (templates_class0.empty() || templates_class1.empty())
    throw Error(ErrorCode::InvalidParams, "each class needs at least one template");
  if (!(pi >= 0.0 && pi <= 1.0)) throw Error(ErrorCode::InvalidParams, "pi must lie in [0,1]");
  if (n < 1) throw Error(ErrorCode::InvalidParams, "n must be >= 1");
  validate(q);

  const bool balanced = pi == 0.5 && n % 2 == 0;
  Dataset ds;
  ds.d = d;
  ds.seed = q.seed;
  ds.items.resize(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    Rng rng(derive_seed(q.seed, {kItemSalt, i}));
    LabeledImage& item = ds.items[i];
    const double u = rng.uniform();
    item.label = balanced ? static_cast<int>(i % 2) : (u < pi ? 1 : 0);
    const auto& pool = item.label == 0 ? templates_class0 : templates_class1;
    item.template_index = static_cast<int>(rng.below(pool.size()));
    item.params = sample_params(q, i);
    item.image = rasterize(pool[static_cast<std::size_t>(item.template_index)], item.params, d);
  });

  ds.meta["q.marginals"] = "uniform";
  ds.meta["q.eta_range"] = range_str(q.eta_range);
  ds.meta["q.xi_range"] = range_str(q.xi_range);
  ds.meta["q.xi_prime_range"] = range_str(q.xi_prime_range);
  ds.meta["q.flip_prob"] = num_str(q.flip_prob);
  ds.meta["q.tau"] = "uniform on the admissible interval given xi";
  ds.meta["pi"] = num_str(pi);
  ds.meta["balanced"] = balanced ? "true" : "false";
  ds.meta["templates_class0"] = std::to_string(templates_class0.size());
  ds.meta["templates_class1"] = std::to_string(templates_class1.size());
  return ds;
}

NonIdentifiableFixture non_identifiable_fixture(int d, const DeformParams& p) {
  if (d < 4 || d % 4 != 0)
    throw Error(ErrorCode::InvalidFixtureParams, "d must be a positive multiple of 4");
  auto strict = [](double xi, double tau) {
    return xi > 0.5 && tau < 0.25 && 0.25 < tau + xi / 2 && tau + xi / 2 < 0.75 &&
           0.75 < tau + xi;
  };
  if (!(p.eta > 0.0) || !strict(p.xi, p.tau) || !strict(p.xi_prime, p.tau_prime))
    throw Error(ErrorCode::InvalidFixtureParams,
                "need eta > 0 and tau < 1/4 < tau + xi/2 < 3/4 < tau + xi in both axes");

  const double delta = std::min({0.5 - (0.25 - p.tau) / p.xi, (0.75 - p.tau) / p.xi - 0.5,
                                 0.5 - (0.25 - p.tau_prime) / p.xi_prime,
                                 (0.75 - p.tau_prime) / p.xi_prime - 0.5});
  NonIdentifiableFixture fx{TemplateFunction::tent(delta), TemplateFunction::tent(delta),
                            TemplateFunction::micro_tent_grid(d), delta};
  fx.f1 = TemplateFunction::sum(
      {TemplateFunction::affine(fx.f0, p.eta, p.xi, p.xi_prime, p.tau, p.tau_prime), fx.g});
  return fx;
}

DeformParams fixture_model_params(const DeformParams& p) {
  DeformParams m = p;
  m.tau = -p.tau;
  m.tau_prime = -p.tau_prime;
  return m;
}

}  // namespace deformclass::datagen
