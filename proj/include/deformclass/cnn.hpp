#pragma once

// Single-layer convolutional machinery: zero-padded feature maps with global
// max-pooling, the scale-indexed filter bank, the Max^r ReLU tree, the tempered
// softmax and the resulting explicit two-class classifier.

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "deformclass/model.hpp"

namespace deformclass::cnn {

/// Square filter, row-major. size == 0 marks a null filter (response 0).
struct Filter {
  int size = 0;
  std::vector<double> w;
  int k = 0;  ///< class (bank filters)
  double xi = 0.0, xi_prime = 0.0;

  bool is_null() const { return size == 0; }
  double at(int a, int b) const { return w[static_cast<std::size_t>(a) * size + b]; }
};

/// Smallest square sub-matrix of the d x d matrix m holding all nonzero
/// entries (anchored at the top-left of the nonzero bounding box, shifted back
/// inside the matrix if needed). Returns a null filter for an all-zero m.
Filter quadratic_support(std::span<const double> m, int d);

/// max over the ReLU'd cross-correlation of the filter with X framed by
/// size-wide zero borders. Throws FilterTooLarge if size > d.
double feature_max(const Filter& filter, const GrayImage& img);

/// Literal pairwise ((y - z)_+ + z)_+ tree over the values zero-padded to a
/// power of two. Throws EmptyList.
double max_tree(std::span<const double> values);

/// (p0, p1) = softmax(beta z0, beta z1), max-shifted and renormalized.
std::pair<double, double> softmax_beta(double z0, double z1, double beta);

struct FilterBank {
  std::vector<Filter> filters;  ///< class-major, then xi, then xi' ascending
  int Xi = 0;
  int d = 0;
  std::size_t non_null() const;
};

/// 2 (2 Xi d + 1)^2 filters: f_k sampled at (xi j/d, xi' j'/d), j, j' = 1..d,
/// Frobenius-normalized and cropped to the quadratic support.
FilterBank build_filter_bank(const TemplateFunction& f0, const TemplateFunction& f1, int Xi,
                             int d);

struct ExplicitOutput {
  double z0 = 0, z1 = 0;
  double p0 = 0.5, p1 = 0.5;
  int label = 0;  ///< argmax, ties to class 0
  std::size_t filters_evaluated = 0;
};

/// The explicit classifier z_k = Max^r over the class-k feature maxima.
///
/// Feature maxima are computed with FFT cross-correlation on the image cropped
/// to its nonzero bounding box (an exact reduction, since zero rows/columns
/// add nothing to any shift). With pruning enabled, filters are visited in
/// decreasing order of the Cauchy-Schwarz bound
///   max-window-norm(X, filter size) * max-window-norm(W, crop size)
/// and skipped once the bound cannot beat the running maximum; z_k stays exact.
class ExplicitClassifier {
 public:
  explicit ExplicitClassifier(std::shared_ptr<const FilterBank> bank, bool prune = true);
  ~ExplicitClassifier();
  ExplicitClassifier(const ExplicitClassifier&) = delete;
  ExplicitClassifier& operator=(const ExplicitClassifier&) = delete;

  /// Throws ResolutionMismatch if img.d() != bank.d.
  ExplicitOutput classify(const GrayImage& img, double beta) const;
  /// Images are processed in parallel; results are in input order.
  std::vector<ExplicitOutput> classify_batch(std::span<const GrayImage> imgs, double beta) const;

  /// Every class-k feature maximum (no pruning), for inspection and tests.
  std::vector<double> all_features(const GrayImage& img, int k) const;

  const FilterBank& bank() const { return *bank_; }

 private:
  struct Impl;
  std::shared_ptr<const FilterBank> bank_;
  std::unique_ptr<Impl> impl_;
  bool prune_;
};

/// One-shot convenience wrapper around ExplicitClassifier.
ExplicitOutput classify_explicit(const FilterBank& bank, const GrayImage& img, double beta);

}  // namespace deformclass::cnn
