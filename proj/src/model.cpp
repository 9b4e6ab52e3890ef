#include "deformclass/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "deformclass/error.hpp"

namespace deformclass {

namespace detail {

struct TemplateNode {
  TemplateFunction::Kind kind;
  double lipschitz_raw = 0.0;
  double l1 = 0.0;
  Box box;
  std::string description;
};

}  // namespace detail

namespace {

constexpr double kSupportLo = 0.25;
constexpr double kSupportHi = 0.75;
constexpr double kBoxTol = 1e-9;
constexpr int kL1Resolution = 512;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double pos(double v) { return v > 0.0 ? v : 0.0; }

void require_support(const Box& b, const std::string& what) {
  if (b.x_lo < kSupportLo - kBoxTol || b.x_hi > kSupportHi + kBoxTol ||
      b.y_lo < kSupportLo - kBoxTol || b.y_hi > kSupportHi + kBoxTol) {
    std::ostringstream os;
    os << what << " has support box [" << b.x_lo << "," << b.x_hi << "]x[" << b.y_lo << ","
       << b.y_hi << "] outside [1/4,3/4]^2";
    throw Error(ErrorCode::InvalidParams, os.str());
  }
}

double eval_kind(const TemplateFunction::Kind& kind, double x, double y) {
  return std::visit(
      Overloaded{
          [&](const TemplateFunction::Tent& t) {
            return pos(t.delta - std::abs(x - t.cx) - std::abs(y - t.cy));
          },
          [&](const TemplateFunction::Cone& c) {
            return pos(c.radius - std::hypot(x - c.cx, y - c.cy));
          },
          [&](const TemplateFunction::Cross& c) {
            const double u = std::abs(x - c.cx);
            const double v = std::abs(y - c.cy);
            const double horizontal = std::min(c.half_length - u, c.half_width - v);
            const double vertical = std::min(c.half_length - v, c.half_width - u);
            return pos(std::max(horizontal, vertical));
          },
          [&](const TemplateFunction::MicroTentGrid& g) {
            if (x < kSupportLo || x > kSupportHi || y < kSupportLo || y > kSupportHi) return 0.0;
            const int d = g.d_grid;
            const int cells = d / 2;
            const int i = std::clamp(static_cast<int>(std::floor((x - kSupportLo) * d)), 0,
                                     cells - 1);
            const int j = std::clamp(static_cast<int>(std::floor((y - kSupportLo) * d)), 0,
                                     cells - 1);
            const double ax = kSupportLo + (i + 0.5) / d;
            const double ay = kSupportLo + (j + 0.5) / d;
            return pos(0.5 / d - std::abs(x - ax) - std::abs(y - ay));
          },
          [&](const TemplateFunction::RasterInterp& r) {
            if (x <= kSupportLo || x >= kSupportHi || y <= kSupportLo || y >= kSupportHi)
              return 0.0;
            const int n = r.resolution;
            const double h = (kSupportHi - kSupportLo) / (n + 1);
            const double sx = (x - kSupportLo) / h;
            const double sy = (y - kSupportLo) / h;
            const int kx = std::min(static_cast<int>(sx), n);
            const int ky = std::min(static_cast<int>(sy), n);
            const double fx = sx - kx;
            const double fy = sy - ky;
            // padded node (k, l) holds grid[k-1][l-1] for k, l in 1..n, zero on the frame
            auto node = [&](int k, int l) {
              if (k < 1 || k > n || l < 1 || l > n) return 0.0;
              return r.grid[static_cast<std::size_t>(k - 1) * n + (l - 1)];
            };
            return (1 - fx) * (1 - fy) * node(kx, ky) + fx * (1 - fy) * node(kx + 1, ky) +
                   (1 - fx) * fy * node(kx, ky + 1) + fx * fy * node(kx + 1, ky + 1);
          },
          [&](const std::shared_ptr<const TemplateFunction::Affine>& a) {
            return a->eta * a->inner.eval(a->xi * x + a->tau, a->xi_prime * y + a->tau_prime);
          },
          [&](const std::shared_ptr<const TemplateFunction::Sum>& s) {
            double total = 0.0;
            for (const auto& t : s->terms) total += t.eval(x, y);
            return total;
          },
      },
      kind);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

TemplateFunction TemplateFunction::tent(double delta, double cx, double cy) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidParams, "tent delta must be positive");
  auto node = std::make_shared<detail::TemplateNode>();
  node->kind = Tent{delta, cx, cy};
  node->lipschitz_raw = 1.0;
  node->box = {cx - delta, cx + delta, cy - delta, cy + delta};
  node->description = "tent(delta=" + fmt_double(delta) + ",c=(" + fmt_double(cx) + "," +
                      fmt_double(cy) + "))";
  require_support(node->box, node->description);
  TemplateFunction f(node);
  node->l1 = quadrature_l1(f, kL1Resolution);
  return f;
}

TemplateFunction TemplateFunction::cone(double radius, double cx, double cy) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParams, "cone radius must be positive");
  auto node = std::make_shared<detail::TemplateNode>();
  node->kind = Cone{radius, cx, cy};
  node->lipschitz_raw = 1.0;
  node->box = {cx - radius, cx + radius, cy - radius, cy + radius};
  node->description = "cone(r=" + fmt_double(radius) + ",c=(" + fmt_double(cx) + "," +
                      fmt_double(cy) + "))";
  require_support(node->box, node->description);
  TemplateFunction f(node);
  node->l1 = quadrature_l1(f, kL1Resolution);
  return f;
}

TemplateFunction TemplateFunction::cross(double half_length, double half_width, double cx,
                                         double cy) {
  if (!(half_width > 0.0) || !(half_length >= half_width))
    throw Error(ErrorCode::InvalidParams, "cross needs 0 < half_width <= half_length");
  auto node = std::make_shared<detail::TemplateNode>();
  node->kind = Cross{half_length, half_width, cx, cy};
  node->lipschitz_raw = 1.0;
  node->box = {cx - half_length, cx + half_length, cy - half_length, cy + half_length};
  node->description = "cross(L=" + fmt_double(half_length) + ",w=" + fmt_double(half_width) +
                      ",c=(" + fmt_double(cx) + "," + fmt_double(cy) + "))";
  require_support(node->box, node->description);
  TemplateFunction f(node);
  node->l1 = quadrature_l1(f, kL1Resolution);
  return f;
}

TemplateFunction TemplateFunction::micro_tent_grid(int d_grid) {
  if (d_grid < 4 || d_grid % 4 != 0)
    throw Error(ErrorCode::InvalidParams, "micro-tent grid needs d divisible by 4");
  auto node = std::make_shared<detail::TemplateNode>();
  node->kind = MicroTentGrid{d_grid};
  node->lipschitz_raw = 1.0;
  node->box = {kSupportLo, kSupportHi, kSupportLo, kSupportHi};
  node->description = "micro_tents(d=" + std::to_string(d_grid) + ")";
  TemplateFunction f(node);
  // Exact: (d/2)^2 tents, each with integral 2h^3/3, h = 1/(2d).
  const double h = 0.5 / d_grid;
  node->l1 = (d_grid / 2.0) * (d_grid / 2.0) * 2.0 * h * h * h / 3.0;
  return f;
}

TemplateFunction TemplateFunction::raster(std::vector<double> grid, int resolution) {
  if (resolution < 1 || grid.size() != static_cast<std::size_t>(resolution) * resolution)
    throw Error(ErrorCode::ShapeMismatch, "raster grid must be resolution^2 values");
  double max_diff = 0.0;
  double total = 0.0;
  auto at = [&](int k, int l) {
    if (k < 0 || k >= resolution || l < 0 || l >= resolution) return 0.0;
    return grid[static_cast<std::size_t>(k) * resolution + l];
  };
  for (int k = -1; k <= resolution; ++k) {
    for (int l = -1; l <= resolution; ++l) {
      const double v = at(k, l);
      if (v < 0.0) throw Error(ErrorCode::InvalidParams, "raster values must be >= 0");
      total += v;
      max_diff = std::max({max_diff, std::abs(v - at(k + 1, l)), std::abs(v - at(k, l + 1))});
    }
  }
  if (!(total > 0.0)) throw Error(ErrorCode::AllZeroImage, "raster template is identically zero");
  const double h = (kSupportHi - kSupportLo) / (resolution + 1);
  auto node = std::make_shared<detail::TemplateNode>();
  node->kind = RasterInterp{std::move(grid), resolution};
  node->lipschitz_raw = max_diff / h;
  // Exact integral of the bilinear interpolant (all frame nodes are zero).
  node->l1 = total * h * h;
  node->box = {kSupportLo, kSupportHi, kSupportLo, kSupportHi};
  node->description = "raster(" + std::to_string(resolution) + "x" + std::to_string(resolution) + ")";
  return TemplateFunction(node);
}

TemplateFunction TemplateFunction::affine(const TemplateFunction& inner, double eta, double xi,
                                          double xi_prime, double tau, double tau_prime) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidParams, "affine eta must be positive");
  if (xi == 0.0 || xi_prime == 0.0)
    throw Error(ErrorCode::InvalidParams, "affine scales must be non-zero");
  auto node = std::make_shared<detail::TemplateNode>();
  node->kind = std::make_shared<const Affine>(Affine{inner, eta, xi, xi_prime, tau, tau_prime});
  node->lipschitz_raw = eta * std::max(std::abs(xi), std::abs(xi_prime)) * inner.lipschitz_raw();
  const Box ib = inner.support_box();
  double x0 = (ib.x_lo - tau) / xi, x1 = (ib.x_hi - tau) / xi;
  double y0 = (ib.y_lo - tau_prime) / xi_prime, y1 = (ib.y_hi - tau_prime) / xi_prime;
  node->box = {std::min(x0, x1), std::max(x0, x1), std::min(y0, y1), std::max(y0, y1)};
  node->description = fmt_double(eta) + "*" + inner.describe() + "(" + fmt_double(xi) + "x+" +
                      fmt_double(tau) + "," + fmt_double(xi_prime) + "y+" +
                      fmt_double(tau_prime) + ")";
  require_support(node->box, node->description);
  TemplateFunction f(node);
  node->l1 = quadrature_l1(f, kL1Resolution);
  return f;
}

TemplateFunction TemplateFunction::sum(std::vector<TemplateFunction> terms) {
  if (terms.empty()) throw Error(ErrorCode::InvalidParams, "sum of zero templates");
  auto node = std::make_shared<detail::TemplateNode>();
  Box box = terms.front().support_box();
  double lip = 0.0;
  std::string desc = "sum(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Box b = terms[i].support_box();
    box = {std::min(box.x_lo, b.x_lo), std::max(box.x_hi, b.x_hi), std::min(box.y_lo, b.y_lo),
           std::max(box.y_hi, b.y_hi)};
    lip += terms[i].lipschitz_raw();
    desc += (i ? "," : "") + terms[i].describe();
  }
  node->kind = std::make_shared<const Sum>(Sum{std::move(terms)});
  node->lipschitz_raw = lip;
  node->box = box;
  node->description = desc + ")";
  TemplateFunction f(node);
  node->l1 = quadrature_l1(f, kL1Resolution);
  return f;
}

double TemplateFunction::eval(double x, double y) const {
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) return 0.0;
  return eval_kind(node_->kind, x, y);
}

double TemplateFunction::lipschitz_raw() const { return node_->lipschitz_raw; }
double TemplateFunction::l1_norm() const { return node_->l1; }
Box TemplateFunction::support_box() const { return node_->box; }
std::string TemplateFunction::describe() const { return node_->description; }
const TemplateFunction::Kind& TemplateFunction::kind() const { return node_->kind; }

// --- deformation parameters -------------------------------------------------

std::pair<double, double> assumption_shift_interval(double xi) {
  return {0.75 - pos(xi), 0.25 + pos(-xi)};
}

std::pair<double, double> model_shift_interval(double xi) {
  auto [lo, hi] = assumption_shift_interval(xi);
  return {-hi, -lo};
}

bool is_admissible(const DeformParams& p) {
  constexpr double tol = 1e-12;
  if (!(p.eta > 0.0) || !std::isfinite(p.eta)) return false;
  for (auto [xi, tau] : {std::pair{p.xi, p.tau}, std::pair{p.xi_prime, p.tau_prime}}) {
    if (!std::isfinite(xi) || !std::isfinite(tau)) return false;
    if (p.allow_flips ? std::abs(xi) < 0.5 : xi < 0.5) return false;
    auto [lo, hi] = model_shift_interval(xi);
    if (tau < lo - tol || tau > hi + tol) return false;
  }
  return true;
}

void validate(const DeformParams& p) {
  if (!is_admissible(p)) {
    std::ostringstream os;
    os << "(eta=" << p.eta << ", xi=" << p.xi << ", xi'=" << p.xi_prime << ", tau=" << p.tau
       << ", tau'=" << p.tau_prime << ", flips=" << p.allow_flips << ") is not admissible";
    throw Error(ErrorCode::InvalidParams, os.str());
  }
}

// --- images -----------------------------------------------------------------

GrayImage::GrayImage(int d) : d_(d), pixels_(static_cast<std::size_t>(d) * d, 0.0) {
  if (d < 1) throw Error(ErrorCode::ShapeMismatch, "image side must be positive");
}

GrayImage::GrayImage(int d, std::vector<double> pixels) : d_(d), pixels_(std::move(pixels)) {
  if (d < 1 || pixels_.size() != static_cast<std::size_t>(d) * d)
    throw Error(ErrorCode::ShapeMismatch, "image must hold exactly d^2 pixels");
  for (double v : pixels_)
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidParams, "pixel values must be >= 0");
}

GrayImage GrayImage::scaled(double c) const {
  GrayImage out = *this;
  for (double& v : out.pixels_) v *= c;
  return out;
}

double GrayImage::max_value() const {
  return pixels_.empty() ? 0.0 : *std::max_element(pixels_.begin(), pixels_.end());
}

GrayImage rasterize(const TemplateFunction& f, const DeformParams& p, int d) {
  if (d < 4) throw Error(ErrorCode::ResolutionTooSmall, "rasterize needs d >= 4");
  validate(p);
  GrayImage img(d);
  for (int r = 0; r < d; ++r) {
    const double x = p.xi * (r + 1) / d - p.tau;
    for (int c = 0; c < d; ++c) {
      const double y = p.xi_prime * (c + 1) / d - p.tau_prime;
      img.at(r, c) = p.eta * f.eval(x, y);
    }
  }
  return img;
}

GrayImage normalize_l2(const GrayImage& img) {
  double ss = 0.0;
  for (double v : img.pixels()) ss += v * v;
  if (!(ss > 0.0)) throw Error(ErrorCode::AllZeroImage, "cannot normalize an all-zero image");
  return img.scaled(1.0 / std::sqrt(ss));
}

double discrete_l2_norm(std::span<const double> grid, int d) {
  if (grid.size() != static_cast<std::size_t>(d) * d)
    throw Error(ErrorCode::ShapeMismatch, "grid is not d x d");
  double ss = 0.0;
  for (double v : grid) ss += v * v;
  return std::sqrt(ss) / d;
}

std::vector<double> sample_grid(const TemplateFunction& f, int d) {
  std::vector<double> out(static_cast<std::size_t>(d) * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      out[static_cast<std::size_t>(r) * d + c] = f.eval(double(r + 1) / d, double(c + 1) / d);
  return out;
}

double quadrature_l1(const TemplateFunction& f, int resolution) {
  return midpoint_integral([&](double x, double y) { return f.eval(x, y); }, resolution);
}

double quadrature_l2(const TemplateFunction& f, int resolution) {
  return std::sqrt(midpoint_integral(
      [&](double x, double y) {
        const double v = f.eval(x, y);
        return v * v;
      },
      resolution));
}

double quadrature_inner(const TemplateFunction& f, const TemplateFunction& g, int resolution) {
  return midpoint_integral([&](double x, double y) { return f.eval(x, y) * g.eval(x, y); },
                           resolution);
}

}  // namespace deformclass
