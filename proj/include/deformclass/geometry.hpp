#pragma once

// Support boundaries and the Gamma-set regularity constant.

#include <array>
#include <cstdint>
#include <vector>

#include "deformclass/model.hpp"

namespace deformclass::geometry {

using Point = std::array<double, 2>;

/// Closed polygon phi(t_0), ..., phi(t_{N-1}); phi(1) = phi(0) is implicit.
struct BoundaryCurve {
  std::vector<Point> points;
};

/// Throws DegenerateCurve unless N >= 3 and consecutive points differ by > 1e-9.
void validate(const BoundaryCurve& c);

/// Row-major d x d mask; cell (r, c) covers [r/d, (r+1)/d] x [c/d, (c+1)/d].
struct Mask {
  int d = 0;
  std::vector<std::uint8_t> cells;
  bool at(int r, int c) const { return cells[static_cast<std::size_t>(r) * d + c] != 0; }
};

/// Cells whose pixel exceeds threshold.
Mask support_mask(const GrayImage& img, double threshold = 0.0);

/// Outer boundary of the single 4-connected component of the mask, traced
/// counterclockwise along cell edges. Collinear edge runs are merged, so a
/// rectangle yields 4 corners. Throws EmptyMask / MultipleComponents.
BoundaryCurve trace_boundary(const Mask& mask);

/// n points equally spaced in cumulative arc length along the polygon.
BoundaryCurve resample_arclength(const BoundaryCurve& c, int n);

/// n-point polygon on the ellipse (cx + rx cos t, cy + ry sin t).
BoundaryCurve ellipse(double cx, double cy, double rx, double ry, int n);

struct GammaEstimate {
  double gamma = 0.0;
  std::size_t pairs_evaluated = 0;
  std::size_t singular_pairs = 0;  ///< chord < 1e-9, skipped
};

/// Lower estimate of the smallest Gamma for which the reverted triangle
/// inequality holds at the sampled points: the max over index pairs (u, w) of
///   min(sup_{v in [u,w]} S(v), sup_{t outside} S(t)) / |phi(w) - phi(u)|,
/// S(p) = |phi(u) - p| + |p - phi(w)|. Inner suprema scan all curve points.
/// At most sample_budget pairs are used, taken as a prefix of a fixed
/// bit-reversal ordering, so a larger budget never lowers the estimate.
/// sample_budget <= 0 means all pairs. Throws DegenerateCurve.
GammaEstimate estimate_gamma_report(const BoundaryCurve& curve, long long sample_budget = 0);

inline double estimate_gamma(const BoundaryCurve& curve, long long sample_budget = 0) {
  return estimate_gamma_report(curve, sample_budget).gamma;
}

}  // namespace deformclass::geometry
