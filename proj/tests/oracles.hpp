#pragma once

// Test-side reference computations. Each one is written from the defining
// formula with plain loops and shares no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

inline double tent(double delta, double cx, double cy, double x, double y) {
  return std::max(delta - std::abs(x - cx) - std::abs(y - cy), 0.0);
}

inline double cone(double r, double cx, double cy, double x, double y) {
  return std::max(r - std::hypot(x - cx, y - cy), 0.0);
}

inline double cross(double len, double wid, double cx, double cy, double x, double y) {
  const double u = std::abs(x - cx), v = std::abs(y - cy);
  const double a = std::max(std::min(len - u, wid - v), 0.0);
  const double b = std::max(std::min(len - v, wid - u), 0.0);
  return std::max(a, b);
}

using Fn = std::function<double(double, double)>;

// pixel (j, l), 1-based, holds eta f(xi j/d - tau, xi' l/d - tau'); row-major 0-based storage
inline std::vector<double> rasterize(const Fn& f, double eta, double xi, double xip, double tau,
                                     double taup, int d) {
  std::vector<double> out(static_cast<std::size_t>(d) * d);
  for (int j = 1; j <= d; ++j)
    for (int l = 1; l <= d; ++l)
      out[static_cast<std::size_t>(j - 1) * d + (l - 1)] =
          eta * f(xi * j / static_cast<double>(d) - tau, xip * l / static_cast<double>(d) - taup);
  return out;
}

inline double midpoint(const Fn& f, int R) {
  long double s = 0;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j) s += f((i + 0.5) / R, (j + 0.5) / R);
  return static_cast<double>(s / (static_cast<long double>(R) * R));
}

inline double frobenius(const std::vector<double>& v) {
  long double s = 0;
  for (double x : v) s += static_cast<long double>(x) * x;
  return std::sqrt(static_cast<double>(s));
}

// max over all integer shifts (r, s) of sum_{i,j} W[i+r][j+s] X[i][j], floored at 0
// (the shift set always contains a non-overlapping shift, which gives 0).
inline double shift_max(const std::vector<double>& W, int wl, const std::vector<double>& X, int d) {
  double best = 0.0;
  for (int r = -d; r <= wl; ++r)
    for (int s = -d; s <= wl; ++s) {
      double acc = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          const int a = i + r, b = j + s;
          if (a < 0 || b < 0 || a >= wl || b >= wl) continue;
          acc += W[static_cast<std::size_t>(a) * wl + b] * X[static_cast<std::size_t>(i) * d + j];
        }
      best = std::max(best, acc);
    }
  return best;
}

// resampling index arithmetic in floating point, then clamp to [1, d]
inline std::vector<double> resample_z(const std::vector<double>& px, int d, int jm, int jp, int lm,
                                      int lp, int m) {
  std::vector<double> out(static_cast<std::size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double ta = static_cast<double>(a) / (m - 1), tb = static_cast<double>(b) / (m - 1);
      int j = static_cast<int>(std::floor(jm + ta * (jp - jm) + 1e-12));
      int l = static_cast<int>(std::floor(lm + tb * (lp - lm) + 1e-12));
      j = std::clamp(j, 1, d);
      l = std::clamp(l, 1, d);
      out[static_cast<std::size_t>(a) * m + b] = px[static_cast<std::size_t>(j - 1) * d + (l - 1)];
    }
  return out;
}

// Direct transcription of the reverted triangle inequality ratio on a closed
// polygon: for each pair u < w, the inner arc is u..w, the outer arc the rest.
inline double gamma_bruteforce(const std::vector<std::array<double, 2>>& pts) {
  const std::size_t n = pts.size();
  auto dist = [&](std::size_t a, std::size_t b) {
    return std::hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1]);
  };
  double g = 0.0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t w = u + 1; w < n; ++w) {
      const double chord = dist(u, w);
      if (chord < 1e-9) continue;
      double inner = 0.0, outer = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        const double s = dist(u, v) + dist(v, w);
        if (v >= u && v <= w) inner = std::max(inner, s);
        if (v <= u || v >= w) outer = std::max(outer, s);
      }
      g = std::max(g, std::min(inner, outer) / chord);
    }
  return g;
}

inline double naive_max(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v)
    if (x > m) m = x;
  return m;
}

}  // namespace oracle
