#include <algorithm>
#include <bit>
#include <cmath>

#include "deformclass/cnn.hpp"
#include "deformclass/error.hpp"

namespace deformclass::cnn {

Filter quadratic_support(std::span<const double> m, int d) {
  int r0 = d, r1 = -1, c0 = d, c1 = -1;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (m[static_cast<std::size_t>(r) * d + c] != 0.0) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
  Filter f;
  if (r1 < 0) return f;
  const int side = std::max(r1 - r0, c1 - c0) + 1;
  r0 = std::min(r0, d - side);
  c0 = std::min(c0, d - side);
  f.size = side;
  f.w.resize(static_cast<std::size_t>(side) * side);
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b)
      f.w[static_cast<std::size_t>(a) * side + b] = m[static_cast<std::size_t>(r0 + a) * d + c0 + b];
  return f;
}

double feature_max(const Filter& filter, const GrayImage& img) {
  const int d = img.d();
  if (filter.is_null()) return 0.0;
  const int l = filter.size;
  if (l > d) throw Error(ErrorCode::FilterTooLarge, "filter side exceeds the image side");
  // Patch (i, j) of the padded image starts at X index (i - l, j - l).
  double best = 0.0;
  for (int i = 0; i <= d + l; ++i) {
    for (int j = 0; j <= d + l; ++j) {
      double s = 0.0;
      for (int a = 0; a < l; ++a) {
        const int r = i - l + a;
        if (r < 0 || r >= d) continue;
        for (int b = 0; b < l; ++b) {
          const int c = j - l + b;
          if (c < 0 || c >= d) continue;
          s += filter.at(a, b) * img.at(r, c);
        }
      }
      best = std::max(best, s);
    }
  }
  return best;
}

double max_tree(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyList, "max_tree needs at least one value");
  std::vector<double> layer(std::bit_ceil(values.size()), 0.0);
  std::copy(values.begin(), values.end(), layer.begin());
  // One unit pair ((y - z)_+ + z)_+. The difference is carried as an exact
  // two-term sum (Knuth TwoSum) so rounding never leaks into the output.
  auto two_sum = [](double a, double b, double& err) {
    const double s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
    return s;
  };
  auto unit = [&](double y, double z) {
    double lo = 0.0;
    const double hi = two_sum(y, -z, lo);
    if (hi < 0.0 || (hi == 0.0 && lo <= 0.0)) return z > 0.0 ? z : 0.0;
    double e = 0.0;
    const double s = two_sum(hi, z, e);
    const double r = s + (e + lo);
    return r > 0.0 ? r : 0.0;
  };
  while (layer.size() > 1) {
    std::vector<double> next(layer.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i) next[i] = unit(layer[2 * i], layer[2 * i + 1]);
    layer = std::move(next);
  }
  return layer[0];
}

std::pair<double, double> softmax_beta(double z0, double z1, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidParams, "beta must be positive");
  const double a = beta * z0, b = beta * z1;
  const double m = std::max(a, b);
  const double e0 = std::exp(a - m), e1 = std::exp(b - m);
  const double s = e0 + e1;
  // The smaller probability is computed directly, the larger as its complement.
  if (e0 <= e1) {
    const double p0 = e0 / s;
    return {p0, 1.0 - p0};
  }
  const double p1 = e1 / s;
  return {1.0 - p1, p1};
}

}  // namespace deformclass::cnn
