#include "deformclass/align.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "deformclass/error.hpp"

namespace deformclass::align {

namespace {

double frobenius(std::span<const double> v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::sqrt(ss);
}

void check_gallery(std::span<const GalleryEntry> gallery, int m) {
  if (gallery.empty()) throw Error(ErrorCode::EmptyGallery, "gallery has no entries");
  for (const auto& e : gallery)
    if (e.rep.m != m)
      throw Error(ErrorCode::ResolutionMismatch, "gallery and query use different m");
}

}  // namespace

RectSupport rect_support(const GrayImage& img, double threshold) {
  const int d = img.d();
  RectSupport r{d + 1, 0, d + 1, 0};
  for (int row = 0; row < d; ++row) {
    for (int col = 0; col < d; ++col) {
      if (img.at(row, col) > threshold) {
        r.j_minus = std::min(r.j_minus, row + 1);
        r.j_plus = std::max(r.j_plus, row + 1);
        r.l_minus = std::min(r.l_minus, col + 1);
        r.l_plus = std::max(r.l_plus, col + 1);
      }
    }
  }
  if (r.j_plus == 0) throw Error(ErrorCode::EmptySupport, "no pixel exceeds the threshold");
  return r;
}

std::vector<double> resample_z(const GrayImage& img, const RectSupport& r, int m) {
  if (m < 2) throw Error(ErrorCode::InvalidParams, "resampling needs m >= 2");
  const int d = img.d();
  // floor(lo + (a/(m-1)) * span) = lo + (a * span) div (m-1) for integers.
  auto index = [&](int lo, int hi, int a) {
    const long long span = hi - lo;
    const long long j = lo + (static_cast<long long>(a) * span) / (m - 1);
    return static_cast<int>(std::clamp<long long>(j, 1, d));
  };
  std::vector<int> rows(static_cast<std::size_t>(m)), cols(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    rows[static_cast<std::size_t>(a)] = index(r.j_minus, r.j_plus, a);
    cols[static_cast<std::size_t>(a)] = index(r.l_minus, r.l_plus, a);
  }
  std::vector<double> z(static_cast<std::size_t>(m) * m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      z[static_cast<std::size_t>(a) * m + b] =
          img.at(rows[static_cast<std::size_t>(a)] - 1, cols[static_cast<std::size_t>(b)] - 1);
  return z;
}

AlignedRep transform(const GrayImage& img, int m, double threshold) {
  const RectSupport r = rect_support(img, threshold);
  AlignedRep rep{m, resample_z(img, r, m)};
  const double norm = frobenius(rep.grid);
  if (!(norm > 0.0)) throw Error(ErrorCode::ZeroZ, "resampled grid is identically zero");
  for (double& v : rep.grid) v /= norm;
  return rep;
}

double distance(const AlignedRep& a, const AlignedRep& b) {
  if (a.m != b.m) throw Error(ErrorCode::ResolutionMismatch, "reps use different m");
  double ss = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    const double diff = a.grid[i] - b.grid[i];
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

Match classify_1nn(std::span<const GalleryEntry> gallery, const AlignedRep& query) {
  check_gallery(gallery, query.m);
  Match best{0, -1, std::numeric_limits<double>::infinity(), 1};
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const double dist = distance(gallery[i].rep, query);
    if (dist < best.distance) best = {gallery[i].label, static_cast<int>(i), dist, 1};
  }
  return best;
}

Match classify_1nn_flips(std::span<const GalleryEntry> gallery, const GrayImage& query, int m,
                         double threshold) {
  check_gallery(gallery, m);
  const AlignedRep base = transform(query, m, threshold);
  const auto mm = static_cast<std::size_t>(m);
  std::array<AlignedRep, 4> variants{base, base, base, base};
  for (std::size_t a = 0; a < mm; ++a) {
    for (std::size_t b = 0; b < mm; ++b) {
      const double v = base.grid[a * mm + b];
      variants[1].grid[(mm - 1 - a) * mm + b] = v;
      variants[2].grid[a * mm + (mm - 1 - b)] = v;
      variants[3].grid[(mm - 1 - a) * mm + (mm - 1 - b)] = v;
    }
  }
  Match best{0, -1, std::numeric_limits<double>::infinity(), 1};
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    for (int r = 0; r < 4; ++r) {
      const double dist = distance(gallery[i].rep, variants[static_cast<std::size_t>(r)]);
      if (dist < best.distance) best = {gallery[i].label, static_cast<int>(i), dist, r + 1};
    }
  }
  return best;
}

std::vector<GalleryEntry> build_gallery(const datagen::Dataset& data, int m, double threshold) {
  std::vector<GalleryEntry> gallery;
  gallery.reserve(data.items.size());
  for (const auto& item : data.items) {
    const int mm = m > 0 ? m : item.image.d();
    gallery.push_back({transform(item.image, mm, threshold), item.label});
  }
  return gallery;
}

}  // namespace deformclass::align
