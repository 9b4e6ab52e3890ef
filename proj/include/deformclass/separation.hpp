#pragma once

// The separation quantity D(f, g): how well an affine reparametrization of one
// template can approximate the other, relative to the other's L2 norm.

#include <array>
#include <span>
#include <vector>

#include "deformclass/model.hpp"

namespace deformclass::separation {

/// (1/d^2) sum h[j][l] g[j][l] over row-major d x d grids. Throws ShapeMismatch.
double inner_product_2d(std::span<const double> h, std::span<const double> g, int d);

struct SearchConfig {
  double coarse_step = 0.05;        ///< grid step for b, b', c, c'
  int refine_iters = 8;             ///< step halvings during coordinate descent
  int quadrature_resolution = 512;  ///< midpoint rule used for reported values
  int coarse_resolution = 64;       ///< cheaper midpoint rule used to rank grid cells
  int top_k = 8;                    ///< grid candidates handed to refinement
  double xi_max = 2.0;              ///< |b|, |b'| range is [1/2, xi_max]
  bool nonneg_a = true;
  bool allow_negative_scales = true;
  bool oracle = false;  ///< dense grid at quadrature_resolution, no refinement
};

/// Parameters of a * f(b x + c, b' y + c').
struct AffineFit {
  double a = 1, b = 1, b_prime = 1, c = 0, c_prime = 0;
};

struct SeparationResult {
  double d_fg = 0;   ///< inf || a f(b. + c, b'. + c') - g || / ||g||
  double d_gf = 0;
  double d_max = 0;  ///< max(d_fg, d_gf)
  AffineFit fit_fg, fit_gf;
  SearchConfig config;
  std::size_t candidates_scanned = 0;
};

/// Admissible shift interval for scale b in the "+c" convention:
/// [3/4 - (b)_+, 1/4 + (-b)_+].
std::pair<double, double> shift_interval(double b);

/// One direction: approximate g by reparametrizations of f.
/// Returns the normalized residual and the best fit. Throws ZeroNorm.
std::pair<double, AffineFit> estimate_directed(const TemplateFunction& f,
                                               const TemplateFunction& g,
                                               const SearchConfig& cfg,
                                               std::size_t* scanned = nullptr);

/// Residual || a f(b. + c, b'. + c') - g || / ||g|| for a given (b, b', c, c'),
/// with a chosen optimally, evaluated by the midpoint rule at `resolution`.
std::pair<double, double> residual_at(const TemplateFunction& f, const TemplateFunction& g,
                                      const AffineFit& fit, int resolution, bool nonneg_a);

/// Both directions; upper bound on the exact infimum that decreases as the
/// search is refined.
SeparationResult estimate_D(const TemplateFunction& f, const TemplateFunction& g,
                            const SearchConfig& cfg = {});

struct RiemannRow {
  int d = 0;
  double discrete = 0;      ///< <h, g>_{2,d}
  double reference = 0;     ///< fine midpoint quadrature of int h g
  double observed = 0;      ///< |discrete - reference|
  double bound = 0;         ///< (2/d) |g|_1 |h|_1 (L_g + L_h + 2 L_g L_h / d)
  double norm_observed = 0; ///< |1/|h|_{2,d} - 1/|h|_2|
  double norm_bound = 0;    ///< (4 L_h + 4 L_h^2 / d) / (d |h|_{2,d})
  bool within_bounds() const { return observed <= bound && norm_observed <= norm_bound; }
};

/// Lipschitz constants are the normalized ones (lipschitz_const()).
std::vector<RiemannRow> riemann_error_report(const TemplateFunction& h,
                                             const TemplateFunction& g,
                                             std::span<const int> d_list,
                                             int reference_resolution = 8192);

}  // namespace deformclass::separation
