#pragma once

// A small trainable CNN: one convolutional layer (zero padding, no bias),
// ReLU, global max-pooling, fully connected ReLU layers and a tempered softmax
// over two classes, fitted by least squares on p_1 with Adam.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deformclass/datagen.hpp"
#include "deformclass/model.hpp"

namespace deformclass::cnn {

struct Architecture {
  int n_filters = 28;
  int filter_size = 3;
  std::vector<int> hidden{128};  ///< widths of the fully connected ReLU layers
  double beta = 1.0;             ///< softmax temperature
  bool operator==(const Architecture&) const = default;
};

struct DenseLayer {
  int in = 0, out = 0;
  std::vector<double> w;  ///< out x in, row-major
  std::vector<double> b;  ///< out
  bool operator==(const DenseLayer&) const = default;
};

struct OptimizerConfig {
  int epochs = 100;
  int batch_size = 16;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

/// Records which branch every piecewise-linear unit took; two parameter
/// vectors with equal signatures lie on the same linear piece.
struct ActivationSignature {
  std::vector<int> argmax;          ///< per filter, first maximal patch index
  std::vector<std::uint8_t> relu;   ///< pooled and hidden units that are active
  bool operator==(const ActivationSignature&) const = default;
};

class TrainableCnn {
 public:
  TrainableCnn() = default;
  /// Glorot-uniform weights from the seed, zero biases.
  TrainableCnn(const Architecture& arch, std::uint64_t seed);

  const Architecture& arch() const { return arch_; }

  /// (p0, p1) for one image.
  std::pair<double, double> forward(const GrayImage& img) const;
  int predict(const GrayImage& img) const;

  /// Flat parameter view: conv weights, then per dense layer w then b.
  std::size_t num_params() const;
  double param(std::size_t i) const;
  void set_param(std::size_t i, double v);

  /// Loss (k - p1)^2 and its gradient for one sample, accumulated into grad
  /// (scaled by `scale`). Max-pooling routes the gradient through the first
  /// maximal patch only.
  double loss_and_grad(const GrayImage& img, int label, std::vector<double>& grad,
                       double scale = 1.0, ActivationSignature* sig = nullptr) const;
  double loss(const GrayImage& img, int label, ActivationSignature* sig = nullptr) const;

  /// Binary checkpoint: "DCNN", u16 version, little-endian architecture and
  /// f64 parameters. load throws BadMagic / BadCheckpoint.
  void save(std::ostream& os) const;
  static TrainableCnn load(std::istream& is);
  void save_file(const std::string& path) const;
  static TrainableCnn load_file(const std::string& path);

  bool operator==(const TrainableCnn&) const = default;

 private:
  struct Trace;
  void run(const GrayImage& img, Trace& t) const;

  Architecture arch_;
  std::vector<double> conv_;  ///< n_filters x size x size
  std::vector<DenseLayer> dense_;  ///< hidden layers, then the 2-unit output layer
};

struct TrainLog {
  std::vector<double> epoch_loss;  ///< mean training loss after each epoch
};

/// Mini-batch Adam on (1/n) sum (k_i - p1(X_i))^2. Images are used as given
/// (callers normalize). Throws EmptyDataset.
TrainableCnn train_least_squares(const datagen::Dataset& data, const Architecture& arch,
                                 const OptimizerConfig& opt, TrainLog* log = nullptr);

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;  ///< coordinates whose +-eps step changes the signature
};

/// Central differences on `count` (>= 100) randomly chosen parameters.
/// rel = |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradCheckResult grad_check(const TrainableCnn& net, const datagen::LabeledImage& sample,
                           double eps, std::uint64_t seed = 0, std::size_t count = 100);

}  // namespace deformclass::cnn
