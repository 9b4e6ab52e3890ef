#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "deformclass/cnn.hpp"
#include "deformclass/error.hpp"
#include "deformclass/parallel.hpp"

namespace deformclass::cnn {

std::size_t FilterBank::non_null() const {
  return static_cast<std::size_t>(
      std::count_if(filters.begin(), filters.end(), [](const Filter& f) { return !f.is_null(); }));
}

FilterBank build_filter_bank(const TemplateFunction& f0, const TemplateFunction& f1, int Xi,
                             int d) {
  if (Xi < 1 || d < 1) throw Error(ErrorCode::InvalidParams, "need Xi >= 1 and d >= 1");
  FilterBank bank;
  bank.Xi = Xi;
  bank.d = d;
  const int steps = 2 * Xi * d + 1;
  bank.filters.resize(2 * static_cast<std::size_t>(steps) * steps);
  const TemplateFunction* fk[2] = {&f0, &f1};
  parallel_for(bank.filters.size(), [&](std::size_t idx) {
    const int k = static_cast<int>(idx / (static_cast<std::size_t>(steps) * steps));
    const int rem = static_cast<int>(idx % (static_cast<std::size_t>(steps) * steps));
    const double xi = static_cast<double>(rem / steps - Xi * d) / d;
    const double xi_p = static_cast<double>(rem % steps - Xi * d) / d;
    std::vector<double> m(static_cast<std::size_t>(d) * d);
    double ss = 0.0;
    for (int j = 1; j <= d; ++j)
      for (int jp = 1; jp <= d; ++jp) {
        const double v = (*fk[k])(xi * j / d, xi_p * jp / d);
        m[static_cast<std::size_t>(j - 1) * d + (jp - 1)] = v;
        ss += v * v;
      }
    Filter f;
    if (ss > 0.0) {
      const double inv = 1.0 / std::sqrt(ss);
      for (double& v : m) v *= inv;
      f = quadratic_support(m, d);
    }
    f.k = k;
    f.xi = xi;
    f.xi_prime = xi_p;
    bank.filters[idx] = std::move(f);
  });
  return bank;
}

namespace {

int good_fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

template <class T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double[], FftwDeleter<double>>;
using CplxBuf = std::unique_ptr<fftw_complex[], FftwDeleter<fftw_complex>>;

RealBuf real_buf(std::size_t n) { return RealBuf(fftw_alloc_real(n)); }
CplxBuf cplx_buf(std::size_t n) { return CplxBuf(fftw_alloc_complex(n)); }

class PlanCache {
 public:
  PlanCache() = default;
  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;
  ~PlanCache() {
    std::lock_guard lock(planner_mutex());
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.fwd);
      fftw_destroy_plan(p.inv);
    }
  }

  // FFTW planning is not thread-safe; execution with the new-array interface is.
  const Plans& get(int nx, int ny) {
    std::lock_guard lock(planner_mutex());
    auto it = plans_.find({nx, ny});
    if (it != plans_.end()) return it->second;
    const auto nr = static_cast<std::size_t>(nx) * ny;
    const auto nc = static_cast<std::size_t>(nx) * (ny / 2 + 1);
    RealBuf r = real_buf(nr);
    CplxBuf c = cplx_buf(nc);
    Plans p;
    p.fwd = fftw_plan_dft_r2c_2d(nx, ny, r.get(), c.get(), FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_c2r_2d(nx, ny, c.get(), r.get(), FFTW_ESTIMATE);
    return plans_.emplace(std::make_pair(nx, ny), p).first->second;
  }

 private:
  std::map<std::pair<int, int>, Plans> plans_;
};

// Max over all windows (zero-padded, h x w) of the sum of squares of a rows x cols
// matrix, via an integral image. Windows larger than the matrix cover it.
double max_window_energy(const double* a, int rows, int cols, int h, int w) {
  h = std::min(h, rows);
  w = std::min(w, cols);
  std::vector<double> S(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0);
  auto at = [&](int r, int c) -> double& { return S[static_cast<std::size_t>(r) * (cols + 1) + c]; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double v = a[static_cast<std::size_t>(r) * cols + c];
      at(r + 1, c + 1) = v * v + at(r, c + 1) + at(r + 1, c) - at(r, c);
    }
  double best = 0.0;
  for (int r = h; r <= rows; ++r)
    for (int c = w; c <= cols; ++c)
      best = std::max(best, at(r, c) - at(r - h, c) - at(r, c - w) + at(r - h, c - w));
  return best;
}

}  // namespace

namespace {

// Nonzero bounding box of an image, row-major copy.
struct Crop {
  int rows = 0, cols = 0;
  std::vector<double> v;
};

Crop crop_support(const GrayImage& img) {
  const int d = img.d();
  int r0 = d, r1 = -1, c0 = d, c1 = -1;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (img.at(r, c) != 0.0) {
        r0 = std::min(r0, r);
        r1 = std::max(r1, r);
        c0 = std::min(c0, c);
        c1 = std::max(c1, c);
      }
  Crop cr;
  if (r1 < 0) return cr;
  cr.rows = r1 - r0 + 1;
  cr.cols = c1 - c0 + 1;
  cr.v.resize(static_cast<std::size_t>(cr.rows) * cr.cols);
  for (int r = 0; r < cr.rows; ++r)
    for (int c = 0; c < cr.cols; ++c)
      cr.v[static_cast<std::size_t>(r) * cr.cols + c] = img.at(r0 + r, c0 + c);
  return cr;
}

// Per-image FFT state: spectra of the cropped image for each transform size.
class Correlator {
 public:
  Correlator(const Crop& x, PlanCache& plans) : x_(x), plans_(plans) {}

  double feature(const Filter& f) {
    const int nx = good_fft_size(x_.rows + f.size - 1);
    const int ny = good_fft_size(x_.cols + f.size - 1);
    const Plans& p = plans_.get(nx, ny);
    const auto nr = static_cast<std::size_t>(nx) * ny;
    const auto nc = static_cast<std::size_t>(nx) * (ny / 2 + 1);
    auto& spec = spectrum(nx, ny, p);
    if (work_r_size_ < nr) {
      work_r_ = real_buf(nr);
      work_r_size_ = nr;
    }
    if (work_c_size_ < nc) {
      work_c_ = cplx_buf(nc);
      work_c_size_ = nc;
    }
    double* r = work_r_.get();
    fftw_complex* c = work_c_.get();
    std::fill(r, r + nr, 0.0);
    for (int a = 0; a < f.size; ++a)
      for (int b = 0; b < f.size; ++b) r[static_cast<std::size_t>(a) * ny + b] = f.at(a, b);
    fftw_execute_dft_r2c(p.fwd, r, c);
    // X_hat * conj(W_hat) gives the circular cross-correlation sum_a W[a] X[a + s].
    for (std::size_t i = 0; i < nc; ++i) {
      const double xr = spec[i][0], xi = spec[i][1];
      const double wr = c[i][0], wi = c[i][1];
      c[i][0] = xr * wr + xi * wi;
      c[i][1] = xi * wr - xr * wi;
    }
    fftw_execute_dft_c2r(p.inv, c, r);
    double best = 0.0;
    for (std::size_t i = 0; i < nr; ++i) best = std::max(best, r[i]);
    return best / static_cast<double>(nr);
  }

 private:
  CplxBuf& spectrum(int nx, int ny, const Plans& p) {
    auto it = spectra_.find({nx, ny});
    if (it != spectra_.end()) return it->second;
    const auto nr = static_cast<std::size_t>(nx) * ny;
    const auto nc = static_cast<std::size_t>(nx) * (ny / 2 + 1);
    RealBuf r = real_buf(nr);
    std::fill(r.get(), r.get() + nr, 0.0);
    for (int a = 0; a < x_.rows; ++a)
      for (int b = 0; b < x_.cols; ++b)
        r[static_cast<std::size_t>(a) * ny + b] = x_.v[static_cast<std::size_t>(a) * x_.cols + b];
    CplxBuf c = cplx_buf(nc);
    fftw_execute_dft_r2c(p.fwd, r.get(), c.get());
    return spectra_.emplace(std::make_pair(nx, ny), std::move(c)).first->second;
  }

  const Crop& x_;
  PlanCache& plans_;
  std::map<std::pair<int, int>, CplxBuf> spectra_;
  RealBuf work_r_;
  CplxBuf work_c_;
  std::size_t work_r_size_ = 0, work_c_size_ = 0;
};

}  // namespace

struct ExplicitClassifier::Impl {
  std::vector<std::size_t> by_class[2];  // non-null filter indices
  mutable PlanCache plans;
};

ExplicitClassifier::ExplicitClassifier(std::shared_ptr<const FilterBank> bank, bool prune)
    : bank_(std::move(bank)), impl_(std::make_unique<Impl>()), prune_(prune) {
  for (std::size_t i = 0; i < bank_->filters.size(); ++i) {
    const Filter& f = bank_->filters[i];
    if (f.is_null()) continue;
    if (f.size > bank_->d)
      throw Error(ErrorCode::FilterTooLarge, "bank filter larger than the image side");
    impl_->by_class[f.k == 0 ? 0 : 1].push_back(i);
  }
}

ExplicitClassifier::~ExplicitClassifier() = default;

std::vector<double> ExplicitClassifier::all_features(const GrayImage& img, int k) const {
  if (img.d() != bank_->d) throw Error(ErrorCode::ResolutionMismatch, "image and bank differ in d");
  const Crop x = crop_support(img);
  std::vector<double> out;
  Correlator corr(x, impl_->plans);
  for (std::size_t i = 0; i < bank_->filters.size(); ++i) {
    const Filter& f = bank_->filters[i];
    if (f.k != k) continue;
    out.push_back(f.is_null() || x.rows == 0 ? 0.0 : corr.feature(f));
  }
  return out;
}

ExplicitOutput ExplicitClassifier::classify(const GrayImage& img, double beta) const {
  if (img.d() != bank_->d) throw Error(ErrorCode::ResolutionMismatch, "image and bank differ in d");
  ExplicitOutput out;
  const Crop x = crop_support(img);
  double z[2] = {0.0, 0.0};
  if (x.rows > 0) {
    Correlator corr(x, impl_->plans);
    for (int k = 0; k < 2; ++k) {
      const auto& ids = impl_->by_class[k];
      if (!prune_) {
        std::vector<double> feats;
        feats.reserve(ids.size());
        for (std::size_t id : ids) feats.push_back(corr.feature(bank_->filters[id]));
        out.filters_evaluated += ids.size();
        if (!feats.empty()) z[k] = max_tree(feats);
        continue;
      }
      std::vector<std::pair<double, std::size_t>> order;
      order.reserve(ids.size());
      for (std::size_t id : ids) {
        const Filter& f = bank_->filters[id];
        const double bx = max_window_energy(x.v.data(), x.rows, x.cols, f.size, f.size);
        const double bw = max_window_energy(f.w.data(), f.size, f.size, x.rows, x.cols);
        order.emplace_back(std::sqrt(bx * bw), id);
      }
      std::stable_sort(order.begin(), order.end(),
                       [](const auto& l, const auto& r) { return l.first > r.first; });
      for (const auto& [bound, id] : order) {
        if (bound * (1.0 + 1e-12) + 1e-15 <= z[k]) break;
        z[k] = std::max(z[k], corr.feature(bank_->filters[id]));
        ++out.filters_evaluated;
      }
    }
  }
  out.z0 = z[0];
  out.z1 = z[1];
  std::tie(out.p0, out.p1) = softmax_beta(z[0], z[1], beta);
  out.label = out.p1 > out.p0 ? 1 : 0;
  return out;
}

std::vector<ExplicitOutput> ExplicitClassifier::classify_batch(std::span<const GrayImage> imgs,
                                                               double beta) const {
  std::vector<ExplicitOutput> out(imgs.size());
  parallel_for(imgs.size(), [&](std::size_t i) { out[i] = classify(imgs[i], beta); });
  return out;
}

ExplicitOutput classify_explicit(const FilterBank& bank, const GrayImage& img, double beta) {
  const ExplicitClassifier clf(std::shared_ptr<const FilterBank>(&bank, [](const FilterBank*) {}));
  return clf.classify(img, beta);
}

}  // namespace deformclass::cnn
