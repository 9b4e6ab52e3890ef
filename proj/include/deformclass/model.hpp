#pragma once

// Core domain types: template functions, deformation parameters, pixel grids,
// and rasterization of a deformed template into a d x d image.
//
// Index convention: the math uses 1-based pixel indices j, l in {1..d} where
// pixel (j, l) samples the point (j/d, l/d). Storage is 0-based: row r = j - 1
// (x-direction), column c = l - 1 (y-direction).

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace deformclass {

/// Axis-aligned box [x_lo, x_hi] x [y_lo, y_hi].
struct Box {
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
};

namespace detail {
struct TemplateNode;
}

/// Immutable bivariate intensity function f : R^2 -> [0, inf) with support in
/// [1/4, 3/4]^2. Copies share the underlying node.
class TemplateFunction {
 public:
  /// (delta - |x - cx| - |y - cy|)_+
  struct Tent {
    double delta;
    double cx = 0.5;
    double cy = 0.5;
  };
  /// (radius - |(x, y) - c|_2)_+ ; support is a disk.
  struct Cone {
    double radius;
    double cx = 0.5;
    double cy = 0.5;
  };
  /// Plus-shaped ridge: max(arm(u, v), arm(v, u)) with u = x - cx, v = y - cy and
  /// arm(u, v) = min(half_length - |u|, half_width - |v|)_+.
  struct Cross {
    double half_length;
    double half_width;
    double cx = 0.5;
    double cy = 0.5;
  };
  /// Sum of (d/2)^2 micro-tents of half-width 1/(2d) on the cells of
  /// [1/4, 3/4]^2; vanishes on the grid (Z/d)^2.
  struct MicroTentGrid {
    int d_grid;
  };
  /// Bilinear interpolation of a resolution x resolution grid (row-major,
  /// rows = x) framed by a ring of zeros and stretched over [1/4, 3/4]^2.
  struct RasterInterp {
    std::vector<double> grid;
    int resolution;
  };
  struct Affine;
  struct Sum;

  static TemplateFunction tent(double delta, double cx = 0.5, double cy = 0.5);
  static TemplateFunction cone(double radius, double cx = 0.5, double cy = 0.5);
  static TemplateFunction cross(double half_length, double half_width, double cx = 0.5,
                                double cy = 0.5);
  static TemplateFunction micro_tent_grid(int d_grid);
  static TemplateFunction raster(std::vector<double> grid, int resolution);
  /// x -> eta * inner(xi * x + tau, xi_prime * y + tau_prime). Note the "+" shift.
  static TemplateFunction affine(const TemplateFunction& inner, double eta, double xi,
                                 double xi_prime, double tau, double tau_prime);
  static TemplateFunction sum(std::vector<TemplateFunction> terms);

  double eval(double x, double y) const;
  double operator()(double x, double y) const { return eval(x, y); }

  /// Lipschitz constant w.r.t. the l1 distance: |f(p) - f(q)| <= L |p - q|_1.
  double lipschitz_raw() const;
  /// Midpoint-quadrature estimate of ||f||_1 over [0, 1]^2 (raster kind: its own grid).
  double l1_norm() const;
  /// Normalized constant C_L with |f(p) - f(q)| <= C_L ||f||_1 |p - q|_1.
  double lipschitz_const() const { return lipschitz_raw() / l1_norm(); }
  /// Bounding box of the support (the "rectangular support" of f).
  Box support_box() const;
  std::string describe() const;

  using Kind = std::variant<Tent, Cone, Cross, MicroTentGrid, RasterInterp,
                            std::shared_ptr<const Affine>, std::shared_ptr<const Sum>>;
  const Kind& kind() const;

 private:
  explicit TemplateFunction(std::shared_ptr<const detail::TemplateNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const detail::TemplateNode> node_;
};

struct TemplateFunction::Affine {
  TemplateFunction inner;
  double eta, xi, xi_prime, tau, tau_prime;
};

struct TemplateFunction::Sum {
  std::vector<TemplateFunction> terms;
};

/// Deformation (eta, xi, xi', tau, tau') in the sign convention of the image
/// model: X_{j,l} = eta * f(xi * j/d - tau, xi' * l/d - tau').
struct DeformParams {
  double eta = 1.0;
  double xi = 1.0;
  double xi_prime = 1.0;
  double tau = 0.0;
  double tau_prime = 0.0;
  bool allow_flips = false;

  static DeformParams identity() { return {}; }
};

/// Shift interval [3/4 - (xi)_+, 1/4 + (-xi)_+] as stated for the map
/// u -> f(xi * u + tau); keeps that map's support inside [0, 1].
std::pair<double, double> assumption_shift_interval(double xi);

/// The same constraint expressed for the model's f(xi * x - tau): the negation
/// of assumption_shift_interval, i.e. [-1/4 - (-xi)_+, (xi)_+ - 3/4].
std::pair<double, double> model_shift_interval(double xi);

/// True iff p satisfies the admissibility constraints for its flip mode.
bool is_admissible(const DeformParams& p);
/// Throws Error(InvalidParams) unless is_admissible(p).
void validate(const DeformParams& p);

/// d x d non-negative pixel grid.
class GrayImage {
 public:
  GrayImage() = default;
  explicit GrayImage(int d);
  GrayImage(int d, std::vector<double> pixels);

  int d() const { return d_; }
  double at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * d_ + col]; }
  double& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * d_ + col]; }
  std::span<const double> pixels() const { return pixels_; }
  std::span<double> pixels() { return pixels_; }

  GrayImage scaled(double c) const;
  double max_value() const;
  bool operator==(const GrayImage&) const = default;

 private:
  int d_ = 0;
  std::vector<double> pixels_;
};

/// pixels[r][c] = eta * f(xi (r+1)/d - tau, xi' (c+1)/d - tau').
GrayImage rasterize(const TemplateFunction& f, const DeformParams& p, int d);

/// Frobenius normalization; throws AllZeroImage.
GrayImage normalize_l2(const GrayImage& img);

/// sqrt((1/d^2) sum grid^2) for a row-major d x d grid.
double discrete_l2_norm(std::span<const double> grid, int d);
inline double discrete_l2_norm(const GrayImage& img) {
  return discrete_l2_norm(img.pixels(), img.d());
}

/// f sampled at (j/d, l/d), j, l = 1..d (row-major, 0-based storage).
std::vector<double> sample_grid(const TemplateFunction& f, int d);

// --- quadrature over [0, 1]^2 -----------------------------------------------

/// Midpoint Riemann sum (1/R^2) sum fn((i + 1/2)/R, (j + 1/2)/R).
template <class Fn>
double midpoint_integral(Fn&& fn, int resolution) {
  const double h = 1.0 / resolution;
  double total = 0.0;
  for (int i = 0; i < resolution; ++i) {
    const double x = (i + 0.5) * h;
    double row = 0.0;
    for (int j = 0; j < resolution; ++j) row += fn(x, (j + 0.5) * h);
    total += row;
  }
  return total * h * h;
}

double quadrature_l1(const TemplateFunction& f, int resolution);
double quadrature_l2(const TemplateFunction& f, int resolution);
double quadrature_inner(const TemplateFunction& f, const TemplateFunction& g, int resolution);

}  // namespace deformclass
