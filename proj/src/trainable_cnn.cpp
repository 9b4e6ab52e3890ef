#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "deformclass/cnn.hpp"
#include "deformclass/error.hpp"
#include "deformclass/rng.hpp"
#include "deformclass/trainable.hpp"

namespace deformclass::cnn {

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

double relu(double x) { return x > 0.0 ? x : 0.0; }

void glorot(std::vector<double>& w, double fan_in, double fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : w) v = rng.uniform(-limit, limit);
}

// Little-endian primitives, independent of the host byte order.
template <class U>
void put_le(std::ostream& os, U v) {
  unsigned char buf[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), sizeof(U));
}

template <class U>
U get_le(std::istream& is) {
  unsigned char buf[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(U)))
    throw Error(ErrorCode::BadCheckpoint, "checkpoint is truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(buf[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double x) { put_le(os, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_le<std::uint64_t>(is)); }

}  // namespace

struct TrainableCnn::Trace {
  int side = 0;                  // padded image side d + 2l
  std::vector<double> padded;    // X' row-major
  std::vector<double> raw;       // per filter, max patch response
  std::vector<int> argmax;       // per filter, first maximal patch (row-major)
  std::vector<std::vector<double>> pre;   // per dense layer, pre-activation
  std::vector<std::vector<double>> post;  // input of each dense layer; post[0] = pooled
  double p0 = 0.5, p1 = 0.5;
};

TrainableCnn::TrainableCnn(const Architecture& arch, std::uint64_t seed) : arch_(arch) {
  if (arch.n_filters < 1 || arch.filter_size < 1 || !(arch.beta > 0.0))
    throw Error(ErrorCode::InvalidParams, "invalid architecture");
  for (int w : arch.hidden)
    if (w < 1) throw Error(ErrorCode::InvalidParams, "hidden widths must be positive");
  Rng rng(seed);
  const int l = arch.filter_size;
  conv_.resize(static_cast<std::size_t>(arch.n_filters) * l * l);
  glorot(conv_, l * l, static_cast<double>(l) * l * arch.n_filters, rng);
  int in = arch.n_filters;
  std::vector<int> widths = arch.hidden;
  widths.push_back(2);
  for (int out : widths) {
    DenseLayer layer{in, out, std::vector<double>(static_cast<std::size_t>(in) * out),
                     std::vector<double>(static_cast<std::size_t>(out), 0.0)};
    glorot(layer.w, in, out, rng);
    dense_.push_back(std::move(layer));
    in = out;
  }
}

void TrainableCnn::run(const GrayImage& img, Trace& t) const {
  const int d = img.d();
  const int l = arch_.filter_size;
  const int F = arch_.n_filters;
  t.side = d + 2 * l;
  t.padded.assign(static_cast<std::size_t>(t.side) * t.side, 0.0);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) t.padded[static_cast<std::size_t>(r + l) * t.side + c + l] = img.at(r, c);

  // Patches start at (i, j), i, j = 0..d+l, in X'.
  const int npos = d + l + 1;
  t.raw.assign(static_cast<std::size_t>(F), -std::numeric_limits<double>::infinity());
  t.argmax.assign(static_cast<std::size_t>(F), 0);
  std::vector<double> patch(static_cast<std::size_t>(l) * l);
  for (int i = 0; i < npos; ++i) {
    for (int j = 0; j < npos; ++j) {
      for (int a = 0; a < l; ++a)
        for (int b = 0; b < l; ++b)
          patch[static_cast<std::size_t>(a) * l + b] =
              t.padded[static_cast<std::size_t>(i + a) * t.side + j + b];
      const int pos = i * npos + j;
      for (int f = 0; f < F; ++f) {
        const double* w = &conv_[static_cast<std::size_t>(f) * l * l];
        double s = 0.0;
        for (std::size_t q = 0; q < patch.size(); ++q) s += w[q] * patch[q];
        if (s > t.raw[static_cast<std::size_t>(f)]) {
          t.raw[static_cast<std::size_t>(f)] = s;
          t.argmax[static_cast<std::size_t>(f)] = pos;
        }
      }
    }
  }

  t.post.assign(1, std::vector<double>(static_cast<std::size_t>(F)));
  for (int f = 0; f < F; ++f) t.post[0][static_cast<std::size_t>(f)] = relu(t.raw[static_cast<std::size_t>(f)]);
  t.pre.clear();
  for (std::size_t L = 0; L < dense_.size(); ++L) {
    const DenseLayer& layer = dense_[L];
    const auto& h = t.post.back();
    std::vector<double> a(static_cast<std::size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o) {
      double s = layer.b[static_cast<std::size_t>(o)];
      const double* w = &layer.w[static_cast<std::size_t>(o) * layer.in];
      for (int i = 0; i < layer.in; ++i) s += w[i] * h[static_cast<std::size_t>(i)];
      a[static_cast<std::size_t>(o)] = s;
    }
    t.pre.push_back(a);
    if (L + 1 < dense_.size()) {
      for (double& v : a) v = relu(v);
      t.post.push_back(std::move(a));
    }
  }
  const auto& z = t.pre.back();
  std::tie(t.p0, t.p1) = softmax_beta(z[0], z[1], arch_.beta);
}

std::pair<double, double> TrainableCnn::forward(const GrayImage& img) const {
  Trace t;
  run(img, t);
  return {t.p0, t.p1};
}

int TrainableCnn::predict(const GrayImage& img) const {
  const auto [p0, p1] = forward(img);
  return p1 > p0 ? 1 : 0;
}

std::size_t TrainableCnn::num_params() const {
  std::size_t n = conv_.size();
  for (const auto& L : dense_) n += L.w.size() + L.b.size();
  return n;
}

double TrainableCnn::param(std::size_t i) const {
  if (i < conv_.size()) return conv_[i];
  i -= conv_.size();
  for (const auto& L : dense_) {
    if (i < L.w.size()) return L.w[i];
    i -= L.w.size();
    if (i < L.b.size()) return L.b[i];
    i -= L.b.size();
  }
  throw Error(ErrorCode::InvalidParams, "parameter index out of range");
}

void TrainableCnn::set_param(std::size_t i, double v) {
  if (i < conv_.size()) {
    conv_[i] = v;
    return;
  }
  i -= conv_.size();
  for (auto& L : dense_) {
    if (i < L.w.size()) {
      L.w[i] = v;
      return;
    }
    i -= L.w.size();
    if (i < L.b.size()) {
      L.b[i] = v;
      return;
    }
    i -= L.b.size();
  }
  throw Error(ErrorCode::InvalidParams, "parameter index out of range");
}

namespace {

ActivationSignature signature_of(const std::vector<int>& argmax, const std::vector<double>& raw,
                                 const std::vector<std::vector<double>>& pre) {
  ActivationSignature s;
  s.argmax = argmax;
  for (double r : raw) s.relu.push_back(r > 0.0);
  for (std::size_t L = 0; L + 1 < pre.size(); ++L)
    for (double a : pre[L]) s.relu.push_back(a > 0.0);
  return s;
}

}  // namespace

double TrainableCnn::loss(const GrayImage& img, int label, ActivationSignature* sig) const {
  Trace t;
  run(img, t);
  if (sig) *sig = signature_of(t.argmax, t.raw, t.pre);
  const double r = label - t.p1;
  return r * r;
}

double TrainableCnn::loss_and_grad(const GrayImage& img, int label, std::vector<double>& grad,
                                   double scale, ActivationSignature* sig) const {
  Trace t;
  run(img, t);
  if (sig) *sig = signature_of(t.argmax, t.raw, t.pre);
  if (grad.size() != num_params()) grad.assign(num_params(), 0.0);
  const double r = label - t.p1;
  const double dl_dp1 = -2.0 * r * scale;
  const double s = arch_.beta * t.p0 * t.p1 * dl_dp1;
  std::vector<double> g = {-s, s};  // dL/dz

  // Offsets of each dense layer's parameters in the flat vector.
  std::vector<std::size_t> offset(dense_.size());
  std::size_t off = conv_.size();
  for (std::size_t L = 0; L < dense_.size(); ++L) {
    offset[L] = off;
    off += dense_[L].w.size() + dense_[L].b.size();
  }

  for (std::size_t L = dense_.size(); L-- > 0;) {
    const DenseLayer& layer = dense_[L];
    if (L + 1 < dense_.size())
      for (int o = 0; o < layer.out; ++o)
        if (!(t.pre[L][static_cast<std::size_t>(o)] > 0.0)) g[static_cast<std::size_t>(o)] = 0.0;
    const auto& h = t.post[L];
    double* gw = &grad[offset[L]];
    double* gb = gw + layer.w.size();
    std::vector<double> gh(static_cast<std::size_t>(layer.in), 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double go = g[static_cast<std::size_t>(o)];
      if (go == 0.0) continue;
      gb[o] += go;
      const double* w = &layer.w[static_cast<std::size_t>(o) * layer.in];
      double* gwo = gw + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) {
        gwo[i] += go * h[static_cast<std::size_t>(i)];
        gh[static_cast<std::size_t>(i)] += go * w[i];
      }
    }
    g = std::move(gh);
  }

  const int l = arch_.filter_size;
  const int npos = img.d() + l + 1;
  for (int f = 0; f < arch_.n_filters; ++f) {
    const double gf = g[static_cast<std::size_t>(f)];
    if (gf == 0.0 || !(t.raw[static_cast<std::size_t>(f)] > 0.0)) continue;
    const int i = t.argmax[static_cast<std::size_t>(f)] / npos;
    const int j = t.argmax[static_cast<std::size_t>(f)] % npos;
    double* gw = &grad[static_cast<std::size_t>(f) * l * l];
    for (int a = 0; a < l; ++a)
      for (int b = 0; b < l; ++b)
        gw[a * l + b] += gf * t.padded[static_cast<std::size_t>(i + a) * t.side + j + b];
  }
  return r * r;
}

void TrainableCnn::save(std::ostream& os) const {
  os.write("DCNN", 4);
  put_le<std::uint16_t>(os, kCheckpointVersion);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(arch_.n_filters));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(arch_.filter_size));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(arch_.hidden.size()));
  for (int w : arch_.hidden) put_le<std::uint32_t>(os, static_cast<std::uint32_t>(w));
  put_f64(os, arch_.beta);
  put_le<std::uint64_t>(os, num_params());
  for (std::size_t i = 0; i < num_params(); ++i) put_f64(os, param(i));
}

TrainableCnn TrainableCnn::load(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "DCNN", 4) != 0)
    throw Error(ErrorCode::BadMagic, "not a DCNN checkpoint");
  const auto version = get_le<std::uint16_t>(is);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::BadCheckpoint, "unsupported checkpoint version " + std::to_string(version));
  Architecture arch;
  arch.n_filters = static_cast<int>(get_le<std::uint32_t>(is));
  arch.filter_size = static_cast<int>(get_le<std::uint32_t>(is));
  const auto n_hidden = get_le<std::uint32_t>(is);
  if (n_hidden > 64) throw Error(ErrorCode::BadCheckpoint, "implausible layer count");
  arch.hidden.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i)
    arch.hidden.push_back(static_cast<int>(get_le<std::uint32_t>(is)));
  arch.beta = get_f64(is);
  if (arch.n_filters < 1 || arch.filter_size < 1 || arch.n_filters > 1 << 20 ||
      arch.filter_size > 1 << 10 || !(arch.beta > 0.0))
    throw Error(ErrorCode::BadCheckpoint, "invalid architecture record");
  for (int w : arch.hidden)
    if (w < 1 || w > 1 << 20) throw Error(ErrorCode::BadCheckpoint, "invalid layer width");
  TrainableCnn net(arch, 0);
  const auto count = get_le<std::uint64_t>(is);
  if (count != net.num_params())
    throw Error(ErrorCode::BadCheckpoint, "parameter count does not match the architecture");
  for (std::size_t i = 0; i < count; ++i) net.set_param(i, get_f64(is));
  return net;
}

void TrainableCnn::save_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::BadCheckpoint, "cannot open " + path + " for writing");
  save(os);
  if (!os) throw Error(ErrorCode::BadCheckpoint, "failed writing " + path);
}

TrainableCnn TrainableCnn::load_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::BadCheckpoint, "cannot open " + path);
  return load(is);
}

TrainableCnn train_least_squares(const datagen::Dataset& data, const Architecture& arch,
                                 const OptimizerConfig& opt, TrainLog* log) {
  if (data.items.empty()) throw Error(ErrorCode::EmptyDataset, "training set is empty");
  if (opt.epochs < 0 || opt.batch_size < 1 || !(opt.learning_rate > 0.0))
    throw Error(ErrorCode::InvalidParams, "invalid optimizer configuration");
  TrainableCnn net(arch, derive_seed(opt.seed, {0x696e6974ULL}));
  const std::size_t P = net.num_params();
  const std::size_t n = data.items.size();
  std::vector<double> m(P, 0.0), v(P, 0.0), grad(P, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  long long step = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng rng(derive_seed(opt.seed, {0x73687566ULL, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(opt.batch_size));
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t q = start; q < stop; ++q) {
        const auto& item = data.items[order[q]];
        epoch_loss += net.loss_and_grad(item.image, item.label, grad, scale);
      }
      ++step;
      const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < P; ++p) {
        m[p] = opt.beta1 * m[p] + (1.0 - opt.beta1) * grad[p];
        v[p] = opt.beta2 * v[p] + (1.0 - opt.beta2) * grad[p] * grad[p];
        const double mh = m[p] / c1, vh = v[p] / c2;
        net.set_param(p, net.param(p) - opt.learning_rate * mh / (std::sqrt(vh) + opt.epsilon));
      }
    }
    if (log) log->epoch_loss.push_back(epoch_loss / static_cast<double>(n));
  }
  return net;
}

GradCheckResult grad_check(const TrainableCnn& net, const datagen::LabeledImage& sample,
                           double eps, std::uint64_t seed, std::size_t count) {
  if (!(eps >= 1e-7 && eps <= 1e-3)) throw Error(ErrorCode::InvalidParams, "eps must lie in [1e-7, 1e-3]");
  const std::size_t P = net.num_params();
  std::vector<double> grad(P, 0.0);
  ActivationSignature base;
  net.loss_and_grad(sample.image, sample.label, grad, 1.0, &base);

  std::vector<std::size_t> idx(P);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  const std::size_t k = std::min(std::max<std::size_t>(count, 100), P);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(P - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());

  GradCheckResult res;
  TrainableCnn probe = net;
  for (std::size_t p : idx) {
    const double orig = probe.param(p);
    ActivationSignature sp, sm;
    probe.set_param(p, orig + eps);
    const double lp = probe.loss(sample.image, sample.label, &sp);
    probe.set_param(p, orig - eps);
    const double lm = probe.loss(sample.image, sample.label, &sm);
    probe.set_param(p, orig);
    if (!(sp == base) || !(sm == base)) {
      ++res.skipped;
      continue;
    }
    const double numeric = (lp - lm) / (2.0 * eps);
    const double analytic = grad[p];
    const double rel = std::abs(analytic - numeric) /
                       std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    res.max_rel_error = std::max(res.max_rel_error, rel);
    ++res.checked;
  }
  return res;
}

}  // namespace deformclass::cnn
