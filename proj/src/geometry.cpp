#include "deformclass/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "deformclass/error.hpp"
#include "deformclass/parallel.hpp"

namespace deformclass::geometry {

namespace {

double dist(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Directions on the lattice, counterclockwise order: E, N, W, S.
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

int count_components(const Mask& m) {
  const int d = m.d;
  std::vector<int> label(m.cells.size(), -1);
  std::vector<int> stack;
  int comps = 0;
  for (int start = 0; start < d * d; ++start) {
    if (!m.cells[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0)
      continue;
    stack.push_back(start);
    label[static_cast<std::size_t>(start)] = comps;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const int r = cur / d, c = cur % d;
      for (int k = 0; k < 4; ++k) {
        const int nr = r + kDx[k], nc = c + kDy[k];
        if (nr < 0 || nc < 0 || nr >= d || nc >= d) continue;
        const int idx = nr * d + nc;
        if (m.cells[static_cast<std::size_t>(idx)] && label[static_cast<std::size_t>(idx)] < 0) {
          label[static_cast<std::size_t>(idx)] = comps;
          stack.push_back(idx);
        }
      }
    }
    ++comps;
  }
  return comps;
}

double signed_area(const std::vector<Point>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    const Point& q = pts[(i + 1) % pts.size()];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

std::uint32_t bit_reverse(std::uint32_t v, int bits) {
  std::uint32_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (v & 1u);
    v >>= 1;
  }
  return r;
}

}  // namespace

void validate(const BoundaryCurve& c) {
  const auto n = c.points.size();
  if (n < 3) throw Error(ErrorCode::DegenerateCurve, "curve needs at least 3 points");
  for (std::size_t i = 0; i < n; ++i)
    if (dist(c.points[i], c.points[(i + 1) % n]) <= 1e-9)
      throw Error(ErrorCode::DegenerateCurve, "consecutive curve points coincide");
}

Mask support_mask(const GrayImage& img, double threshold) {
  Mask m{img.d(), std::vector<std::uint8_t>(img.pixels().size())};
  for (std::size_t i = 0; i < m.cells.size(); ++i) m.cells[i] = img.pixels()[i] > threshold;
  return m;
}

BoundaryCurve trace_boundary(const Mask& mask) {
  const int d = mask.d;
  if (d <= 0 || mask.cells.size() != static_cast<std::size_t>(d) * d)
    throw Error(ErrorCode::ShapeMismatch, "mask size does not match d");
  const int comps = count_components(mask);
  if (comps == 0) throw Error(ErrorCode::EmptyMask, "mask has no true cell");
  if (comps > 1) throw Error(ErrorCode::MultipleComponents, "mask has several components");

  // Directed boundary edges with the interior on the left, stored per start vertex.
  const int side = d + 1;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(side) * side, 0);
  auto vid = [side](int x, int y) { return static_cast<std::size_t>(x) * side + y; };
  auto filled = [&](int r, int c) { return r >= 0 && c >= 0 && r < d && c < d && mask.at(r, c); };
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      if (!mask.at(r, c)) continue;
      if (!filled(r, c - 1)) out[vid(r, c)] |= 1u << 0;
      if (!filled(r + 1, c)) out[vid(r + 1, c)] |= 1u << 1;
      if (!filled(r, c + 1)) out[vid(r + 1, c + 1)] |= 1u << 2;
      if (!filled(r - 1, c)) out[vid(r, c + 1)] |= 1u << 3;
    }
  }

  // Successor rule: prefer left, then straight, then right. Preferring the left
  // turn keeps diagonal-only contacts apart, consistent with 4-connectivity.
  auto next_dir = [&](std::size_t v, int dir) {
    for (int turn : {1, 0, 3}) {
      const int nd = (dir + turn) % 4;
      if (out[v] & (1u << nd)) return nd;
    }
    throw Error(ErrorCode::DegenerateCurve, "open boundary while tracing");
  };

  std::vector<std::uint8_t> used(out.size(), 0);
  std::vector<Point> best;
  double best_area = 0.0;
  for (int x0 = 0; x0 < side; ++x0) {
    for (int y0 = 0; y0 < side; ++y0) {
      for (int dir0 = 0; dir0 < 4; ++dir0) {
        const std::size_t v0 = vid(x0, y0);
        if (!(out[v0] & (1u << dir0)) || (used[v0] & (1u << dir0))) continue;
        std::vector<Point> corners;
        int x = x0, y = y0, dir = dir0;
        do {
          used[vid(x, y)] |= static_cast<std::uint8_t>(1u << dir);
          x += kDx[dir];
          y += kDy[dir];
          const int nd = next_dir(vid(x, y), dir);
          if (nd != dir) corners.push_back({static_cast<double>(x), static_cast<double>(y)});
          dir = nd;
        } while (!(x == x0 && y == y0 && dir == dir0));
        const double area = signed_area(corners);
        if (area > best_area) {
          best_area = area;
          best = std::move(corners);
        }
      }
    }
  }
  BoundaryCurve curve;
  curve.points.reserve(best.size());
  for (const Point& p : best) curve.points.push_back({p[0] / d, p[1] / d});
  return curve;
}

BoundaryCurve resample_arclength(const BoundaryCurve& c, int n) {
  validate(c);
  if (n < 3) throw Error(ErrorCode::InvalidParams, "need at least 3 samples");
  const std::size_t m = c.points.size();
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    cum[i + 1] = cum[i] + dist(c.points[i], c.points[(i + 1) % m]);
  const double total = cum[m];
  BoundaryCurve r;
  r.points.reserve(static_cast<std::size_t>(n));
  std::size_t seg = 0;
  for (int k = 0; k < n; ++k) {
    const double s = total * k / n;
    while (seg + 1 < m && cum[seg + 1] <= s) ++seg;
    const double t = (s - cum[seg]) / (cum[seg + 1] - cum[seg]);
    const Point& a = c.points[seg];
    const Point& b = c.points[(seg + 1) % m];
    r.points.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
  }
  return r;
}

BoundaryCurve ellipse(double cx, double cy, double rx, double ry, int n) {
  BoundaryCurve c;
  c.points.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    c.points.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
  }
  return c;
}

GammaEstimate estimate_gamma_report(const BoundaryCurve& curve, long long sample_budget) {
  validate(curve);
  const auto& p = curve.points;
  const std::size_t n = p.size();
  const std::size_t total = n * (n - 1) / 2;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> all;
  all.reserve(total);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t k = i + 1; k < n; ++k) all.emplace_back(i, k);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (sample_budget <= 0 || static_cast<std::size_t>(sample_budget) >= total) {
    pairs = std::move(all);
  } else {
    const int bits = std::bit_width(std::bit_ceil(total)) - 1;
    for (std::uint32_t k = 0; pairs.size() < static_cast<std::size_t>(sample_budget); ++k) {
      const std::uint32_t idx = bit_reverse(k, bits);
      if (idx < total) pairs.push_back(all[idx]);
    }
  }

  // Per-pair ratio, NaN marks a singular pair.
  std::vector<double> ratio(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t q) {
    const auto [i, k] = pairs[q];
    const double chord = dist(p[i], p[k]);
    if (chord < 1e-9) {
      ratio[q] = std::nan("");
      return;
    }
    double inner = 0.0, outer = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double s = dist(p[i], p[v]) + dist(p[v], p[k]);
      if (v >= i && v <= k) inner = std::max(inner, s);
      if (v <= i || v >= k) outer = std::max(outer, s);
    }
    ratio[q] = std::min(inner, outer) / chord;
  });

  GammaEstimate est;
  est.pairs_evaluated = pairs.size();
  bool any = false;
  for (double r : ratio) {
    if (std::isnan(r)) {
      ++est.singular_pairs;
      continue;
    }
    any = true;
    est.gamma = std::max(est.gamma, r);
  }
  if (!any) throw Error(ErrorCode::DegenerateCurve, "every sampled pair is singular");
  return est;
}

}  // namespace deformclass::geometry
