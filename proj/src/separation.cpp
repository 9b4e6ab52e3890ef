#include "deformclass/separation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "deformclass/error.hpp"
#include "deformclass/parallel.hpp"

namespace deformclass::separation {

namespace {

struct Sample {
  double x, y, g;
};

// Nonzero midpoint samples of g at resolution R.
std::vector<Sample> sparse_samples(const TemplateFunction& g, int R) {
  std::vector<Sample> out;
  const double h = 1.0 / R;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j) {
      const double x = (i + 0.5) * h, y = (j + 0.5) * h;
      const double v = g(x, y);
      if (v != 0.0) out.push_back({x, y, v});
    }
  return out;
}

// Midpoint indices i with (i + 1/2)/R in [lo, hi], clamped to [0, R).
std::pair<int, int> index_range(double lo, double hi, int R) {
  const int a = std::max(0, static_cast<int>(std::floor(lo * R - 0.5)));
  const int b = std::min(R - 1, static_cast<int>(std::ceil(hi * R - 0.5)));
  return {a, b};
}

// Preimage of [lo, hi] under x -> b x + c.
std::pair<double, double> preimage(double lo, double hi, double b, double c) {
  const double u = (lo - c) / b, v = (hi - c) / b;
  return {std::min(u, v), std::max(u, v)};
}

// ||g - a f_bc||^2 / ||g||^2 at the optimal a, from <f_bc, g>, |f_bc|^2, |g|^2.
double normalized_residual_sq(double ip, double ff, double gg, bool nonneg_a, double* a_out) {
  double a = ff > 0.0 ? ip / ff : 0.0;
  if (nonneg_a && a < 0.0) a = 0.0;
  if (a_out) *a_out = a;
  const double r = (gg - 2.0 * a * ip + a * a * ff) / gg;
  return std::max(r, 0.0);
}

std::vector<double> scale_grid(const SearchConfig& cfg) {
  std::vector<double> pos;
  for (int k = 0;; ++k) {
    const double b = 0.5 + k * cfg.coarse_step;
    if (b > cfg.xi_max + 1e-9) break;
    pos.push_back(b);
  }
  std::vector<double> all;
  if (cfg.allow_negative_scales)
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) all.push_back(-*it);
  all.insert(all.end(), pos.begin(), pos.end());
  return all;
}

std::vector<double> shift_grid(double b, double step) {
  const auto [lo, hi] = shift_interval(b);
  std::vector<double> cs;
  for (int k = 0;; ++k) {
    const double c = lo + k * step;
    if (c > hi + 1e-9) break;
    cs.push_back(c);
  }
  return cs;
}

bool admissible(const AffineFit& p, const SearchConfig& cfg) {
  auto scale_ok = [&](double b) {
    const double ab = std::abs(b);
    return ab >= 0.5 - 1e-12 && ab <= cfg.xi_max + 1e-12 && (cfg.allow_negative_scales || b > 0);
  };
  auto shift_ok = [](double b, double c) {
    const auto [lo, hi] = shift_interval(b);
    return c >= lo - 1e-12 && c <= hi + 1e-12;
  };
  return scale_ok(p.b) && scale_ok(p.b_prime) && shift_ok(p.b, p.c) &&
         shift_ok(p.b_prime, p.c_prime);
}

struct Candidate {
  double score;
  std::size_t order;
  AffineFit fit;
};

bool better(const Candidate& l, const Candidate& r) {
  return std::tie(l.score, l.order) < std::tie(r.score, r.order);
}

// Coarse scan: closed-form |f_bc|^2 = |f|^2 / |b b'|, inner product over the
// nonzero samples of g. Returns the best `keep` candidates.
std::vector<Candidate> coarse_scan(const TemplateFunction& f, const TemplateFunction& g,
                                   const SearchConfig& cfg, int R, std::size_t keep,
                                   std::size_t* scanned) {
  const auto gs = sparse_samples(g, R);
  double gg = 0.0;
  for (const auto& s : gs) gg += s.g * s.g;
  const double fn = quadrature_l2(f, R);
  const double ff1 = fn * fn * R * R;
  if (!(gg > 0.0) || !(ff1 > 0.0))
    throw Error(ErrorCode::ZeroNorm, "template has zero norm at the coarse resolution");

  const auto scales = scale_grid(cfg);
  const std::size_t ns = scales.size();
  std::vector<std::vector<Candidate>> per_cell(ns * ns);
  std::vector<std::size_t> counts(ns * ns, 0);
  parallel_for(ns * ns, [&](std::size_t cell) {
    const double b = scales[cell / ns], bp = scales[cell % ns];
    const auto cs = shift_grid(b, cfg.coarse_step);
    const auto cps = shift_grid(bp, cfg.coarse_step);
    const double ff = ff1 / std::abs(b * bp);
    auto& best = per_cell[cell];
    std::size_t order = cell * 1'000'000'000ULL;
    for (double c : cs) {
      for (double cp : cps) {
        double ip = 0.0;
        for (const auto& s : gs) ip += f(b * s.x + c, bp * s.y + cp) * s.g;
        const double r = normalized_residual_sq(ip, ff, gg, cfg.nonneg_a, nullptr);
        Candidate cand{r, order++, {1.0, b, bp, c, cp}};
        if (best.size() < keep || better(cand, best.back())) {
          best.insert(std::upper_bound(best.begin(), best.end(), cand, better), cand);
          if (best.size() > keep) best.pop_back();
        }
        ++counts[cell];
      }
    }
  });
  std::vector<Candidate> merged;
  for (auto& v : per_cell) merged.insert(merged.end(), v.begin(), v.end());
  std::sort(merged.begin(), merged.end(), better);
  if (merged.size() > keep) merged.resize(keep);
  if (scanned)
    for (auto c : counts) *scanned += c;
  return merged;
}

}  // namespace

double inner_product_2d(std::span<const double> h, std::span<const double> g, int d) {
  const auto n = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
  if (d <= 0 || h.size() != n || g.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "grids must both be d x d");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += h[i] * g[i];
  return s / (static_cast<double>(d) * d);
}

std::pair<double, double> shift_interval(double b) {
  return {0.75 - std::max(b, 0.0), 0.25 + std::max(-b, 0.0)};
}

namespace {

// gg = sum of g^2 over the midpoint grid of resolution R.
std::pair<double, double> residual_with(const TemplateFunction& f, const TemplateFunction& g,
                                        const AffineFit& fit, int R, bool nonneg_a, double gg) {
  const Box box = f.support_box();
  const auto [xl, xh] = preimage(box.x_lo, box.x_hi, fit.b, fit.c);
  const auto [yl, yh] = preimage(box.y_lo, box.y_hi, fit.b_prime, fit.c_prime);
  const auto [i0, i1] = index_range(xl, xh, R);
  const auto [j0, j1] = index_range(yl, yh, R);
  const double h = 1.0 / R;
  double ff = 0.0, ip = 0.0;
  for (int i = i0; i <= i1; ++i) {
    const double x = (i + 0.5) * h;
    for (int j = j0; j <= j1; ++j) {
      const double y = (j + 0.5) * h;
      const double v = f(fit.b * x + fit.c, fit.b_prime * y + fit.c_prime);
      if (v == 0.0) continue;
      ff += v * v;
      ip += v * g(x, y);
    }
  }
  double a = 0.0;
  const double r2 = normalized_residual_sq(ip, ff, gg, nonneg_a, &a);
  return {std::sqrt(r2), a};
}

double grid_energy(const TemplateFunction& g, int R) {
  const double gn = quadrature_l2(g, R);
  return gn * gn * R * R;
}

}  // namespace

std::pair<double, double> residual_at(const TemplateFunction& f, const TemplateFunction& g,
                                      const AffineFit& fit, int R, bool nonneg_a) {
  const double gg = grid_energy(g, R);
  if (!(gg > 0.0)) throw Error(ErrorCode::ZeroNorm, "g has zero norm");
  return residual_with(f, g, fit, R, nonneg_a, gg);
}

std::pair<double, AffineFit> estimate_directed(const TemplateFunction& f,
                                               const TemplateFunction& g,
                                               const SearchConfig& cfg, std::size_t* scanned) {
  if (!(cfg.coarse_step > 0.0) || cfg.xi_max < 0.5 || cfg.quadrature_resolution < 1 ||
      cfg.coarse_resolution < 1 || cfg.top_k < 1 || cfg.refine_iters < 0)
    throw Error(ErrorCode::InvalidParams, "invalid search configuration");
  const int R = cfg.quadrature_resolution;
  const double gg = grid_energy(g, R);
  if (!(grid_energy(f, R) > 0.0) || !(gg > 0.0))
    throw Error(ErrorCode::ZeroNorm, "template has zero L2 norm");

  auto evaluate = [&](AffineFit fit) {
    const auto [r, a] = residual_with(f, g, fit, R, cfg.nonneg_a, gg);
    fit.a = a;
    return std::make_pair(r, fit);
  };

  if (cfg.oracle) {
    const auto best = coarse_scan(f, g, cfg, R, 1, scanned);
    return evaluate(best.front().fit);
  }

  auto starts = coarse_scan(f, g, cfg, cfg.coarse_resolution,
                            static_cast<std::size_t>(cfg.top_k), scanned);
  const AffineFit identity{};
  if (admissible(identity, cfg)) starts.push_back({0.0, ~std::size_t{0}, identity});

  std::vector<std::pair<double, AffineFit>> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t s) {
    auto cur = evaluate(starts[s].fit);
    double step = cfg.coarse_step;
    for (int it = 0; it < cfg.refine_iters; ++it) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (int coord = 0; coord < 4; ++coord) {
          for (double sign : {1.0, -1.0}) {
            AffineFit trial = cur.second;
            double* field[4] = {&trial.b, &trial.b_prime, &trial.c, &trial.c_prime};
            *field[coord] += sign * step;
            if (!admissible(trial, cfg)) continue;
            auto res = evaluate(trial);
            if (res.first < cur.first) {
              cur = res;
              improved = true;
            }
          }
        }
      }
      step *= 0.5;
    }
    results[s] = cur;
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s)
    if (results[s].first < results[best].first) best = s;
  return results[best];
}

SeparationResult estimate_D(const TemplateFunction& f, const TemplateFunction& g,
                            const SearchConfig& cfg) {
  SeparationResult r;
  r.config = cfg;
  std::tie(r.d_fg, r.fit_fg) = estimate_directed(f, g, cfg, &r.candidates_scanned);
  std::tie(r.d_gf, r.fit_gf) = estimate_directed(g, f, cfg, &r.candidates_scanned);
  r.d_max = std::max(r.d_fg, r.d_gf);
  return r;
}

std::vector<RiemannRow> riemann_error_report(const TemplateFunction& h,
                                             const TemplateFunction& g,
                                             std::span<const int> d_list,
                                             int reference_resolution) {
  const double reference = quadrature_inner(h, g, reference_resolution);
  const double h_l2 = quadrature_l2(h, reference_resolution);
  const double h1 = h.l1_norm(), g1 = g.l1_norm();
  const double Lh = h.lipschitz_const(), Lg = g.lipschitz_const();
  std::vector<RiemannRow> rows;
  for (int d : d_list) {
    RiemannRow row;
    row.d = d;
    const auto hs = sample_grid(h, d);
    const auto gs = sample_grid(g, d);
    row.discrete = inner_product_2d(hs, gs, d);
    row.reference = reference;
    row.observed = std::abs(row.discrete - reference);
    row.bound = 2.0 / d * g1 * h1 * (Lg + Lh + 2.0 * Lg * Lh / d);
    const double h_d = discrete_l2_norm(hs, d);
    row.norm_observed = std::abs(1.0 / h_d - 1.0 / h_l2);
    row.norm_bound = (4.0 * Lh + 4.0 * Lh * Lh / d) / (d * h_d);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace deformclass::separation
