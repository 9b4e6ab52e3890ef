#pragma once

// Image alignment: rescale the rectangular support of an image onto an m x m
// grid, normalize, and classify by the nearest aligned training image.

#include <span>
#include <vector>

#include "deformclass/datagen.hpp"
#include "deformclass/model.hpp"

namespace deformclass::align {

/// Smallest and largest 1-based row (j) and column (l) indices holding a
/// pixel above the threshold.
struct RectSupport {
  int j_minus = 1, j_plus = 1, l_minus = 1, l_plus = 1;
  bool operator==(const RectSupport&) const = default;
};

/// m x m grid with unit Frobenius norm.
struct AlignedRep {
  int m = 0;
  std::vector<double> grid;
};

struct GalleryEntry {
  AlignedRep rep;
  int label = 0;
};

struct Match {
  int label = 0;
  int index = 0;
  double distance = 0.0;
  int variant = 1;  ///< orientation 1..4 (flip-aware classifier only)
};

/// Throws EmptySupport if no pixel exceeds threshold. threshold = 0 gives the
/// plain rectangular support; positive thresholds expect normalized images.
RectSupport rect_support(const GrayImage& img, double threshold = 0.0);

/// grid[a][b] = X[floor(j- + t_a (j+ - j-))][floor(l- + t_b (l+ - l-))] with
/// t_a = a/(m-1); the floor is evaluated in exact integer arithmetic.
std::vector<double> resample_z(const GrayImage& img, const RectSupport& r, int m);

/// Z / |Z|_F. Invariant under scaling the image by c > 0.
AlignedRep transform(const GrayImage& img, int m, double threshold = 0.0);

/// Frobenius distance between two reps (the discrete L2 distance between the
/// corresponding unit-L2 functions on [0,1]^2). Throws ResolutionMismatch.
double distance(const AlignedRep& a, const AlignedRep& b);

/// Nearest gallery entry; ties go to the smallest index.
Match classify_1nn(std::span<const GalleryEntry> gallery, const AlignedRep& query);

/// Best fit over the four flips Z(t,t'), Z(1-t,t'), Z(t,1-t'), Z(1-t,1-t'),
/// all normalized by |Z|_F. Ties go to the smallest (index, variant).
Match classify_1nn_flips(std::span<const GalleryEntry> gallery, const GrayImage& query, int m,
                         double threshold = 0.0);

/// Aligns every image of a dataset (m = 0 means m = d).
std::vector<GalleryEntry> build_gallery(const datagen::Dataset& data, int m = 0,
                                        double threshold = 0.0);

}  // namespace deformclass::align
