#include "deformclass/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "deformclass/align.hpp"
#include "deformclass/cnn.hpp"
#include "deformclass/error.hpp"
#include "deformclass/io.hpp"
#include "deformclass/parallel.hpp"
#include "deformclass/rng.hpp"

namespace deformclass::harness {

namespace {

constexpr std::uint64_t kTestSalt = 0x74657374ULL;   // "test"
constexpr std::uint64_t kTrainSalt = 0x7472616eULL;  // "tran"
constexpr std::uint64_t kCnnSalt = 0x636e6e00ULL;    // "cnn"

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  config_error(key + ": expected a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  config_error(key + ": expected an integer, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const unsigned long long x = std::stoull(v, &used);
      if (used == v.size()) return x;
    }
  } catch (const std::logic_error&) {
  }
  config_error(key + ": expected an unsigned integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  config_error(key + ": expected true or false, got '" + v + "'");
}

std::pair<double, double> to_range(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) config_error(key + ": expected 'lo,hi'");
  return {to_double(key, parts[0]), to_double(key, parts[1])};
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (v.empty() || v == "none") return out;
  for (const auto& p : split(v, ',')) out.push_back(static_cast<int>(to_int(key, p)));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.task",
       [](auto& c, auto& k, auto& v) {
         if (v == "two_templates") c.task = TaskKind::TwoTemplates;
         else if (v == "multi_template") c.task = TaskKind::MultiTemplate;
         else if (v == "mnist_pair") c.task = TaskKind::MnistPair;
         else config_error(k + ": unknown task '" + v + "'");
       }},
      {"experiment.template0", [](auto& c, auto&, auto& v) { c.templates0 = {v}; }},
      {"experiment.template1", [](auto& c, auto&, auto& v) { c.templates1 = {v}; }},
      {"experiment.templates0", [](auto& c, auto&, auto& v) { c.templates0 = split(v, ';'); }},
      {"experiment.templates1", [](auto& c, auto&, auto& v) { c.templates1 = split(v, ';'); }},
      {"experiment.n_list", [](auto& c, auto& k, auto& v) { c.n_list = to_int_list(k, v); }},
      {"experiment.n_test", [](auto& c, auto& k, auto& v) { c.n_test = static_cast<int>(to_int(k, v)); }},
      {"experiment.repetitions",
       [](auto& c, auto& k, auto& v) { c.repetitions = static_cast<int>(to_int(k, v)); }},
      {"experiment.d", [](auto& c, auto& k, auto& v) { c.d = static_cast<int>(to_int(k, v)); }},
      {"experiment.seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"experiment.classifiers",
       [](auto& c, auto&, auto& v) {
         c.classifiers.clear();
         if (v.empty() || v == "none") return;
         for (const auto& name : split(v, ',')) c.classifiers.push_back(parse_classifier(name));
       }},
      {"q.eta_range", [](auto& c, auto& k, auto& v) { c.q.eta_range = to_range(k, v); }},
      {"q.xi_range", [](auto& c, auto& k, auto& v) { c.q.xi_range = to_range(k, v); }},
      {"q.xi_prime_range", [](auto& c, auto& k, auto& v) { c.q.xi_prime_range = to_range(k, v); }},
      {"q.flip_prob", [](auto& c, auto& k, auto& v) { c.q.flip_prob = to_double(k, v); }},
      {"align.m", [](auto& c, auto& k, auto& v) { c.align_m = static_cast<int>(to_int(k, v)); }},
      {"align.threshold", [](auto& c, auto& k, auto& v) { c.align_threshold = to_double(k, v); }},
      {"cnn.Xi", [](auto& c, auto& k, auto& v) { c.cnn_Xi = static_cast<int>(to_int(k, v)); }},
      {"cnn.beta", [](auto& c, auto& k, auto& v) { c.cnn_beta = to_double(k, v); }},
      {"cnn.filters",
       [](auto& c, auto& k, auto& v) { c.arch.n_filters = static_cast<int>(to_int(k, v)); }},
      {"cnn.filter_size",
       [](auto& c, auto& k, auto& v) { c.arch.filter_size = static_cast<int>(to_int(k, v)); }},
      {"cnn.hidden", [](auto& c, auto& k, auto& v) { c.arch.hidden = to_int_list(k, v); }},
      {"cnn.train_beta", [](auto& c, auto& k, auto& v) { c.arch.beta = to_double(k, v); }},
      {"cnn.epochs", [](auto& c, auto& k, auto& v) { c.opt.epochs = static_cast<int>(to_int(k, v)); }},
      {"cnn.batch_size",
       [](auto& c, auto& k, auto& v) { c.opt.batch_size = static_cast<int>(to_int(k, v)); }},
      {"cnn.learning_rate", [](auto& c, auto& k, auto& v) { c.opt.learning_rate = to_double(k, v); }},
      {"mnist.images", [](auto& c, auto&, auto& v) { c.mnist_images = v; }},
      {"mnist.labels", [](auto& c, auto&, auto& v) { c.mnist_labels = v; }},
      {"mnist.class_a",
       [](auto& c, auto& k, auto& v) { c.mnist_class_a = static_cast<int>(to_int(k, v)); }},
      {"mnist.class_b",
       [](auto& c, auto& k, auto& v) { c.mnist_class_b = static_cast<int>(to_int(k, v)); }},
      {"mnist.templates",
       [](auto& c, auto& k, auto& v) { c.mnist_templates = static_cast<int>(to_int(k, v)); }},
      {"search.coarse_step", [](auto& c, auto& k, auto& v) { c.search.coarse_step = to_double(k, v); }},
      {"search.refine_iters",
       [](auto& c, auto& k, auto& v) { c.search.refine_iters = static_cast<int>(to_int(k, v)); }},
      {"search.quadrature_resolution",
       [](auto& c, auto& k, auto& v) {
         c.search.quadrature_resolution = static_cast<int>(to_int(k, v));
       }},
      {"search.coarse_resolution",
       [](auto& c, auto& k, auto& v) { c.search.coarse_resolution = static_cast<int>(to_int(k, v)); }},
      {"search.top_k", [](auto& c, auto& k, auto& v) { c.search.top_k = static_cast<int>(to_int(k, v)); }},
      {"search.xi_max", [](auto& c, auto& k, auto& v) { c.search.xi_max = to_double(k, v); }},
      {"search.nonneg_a", [](auto& c, auto& k, auto& v) { c.search.nonneg_a = to_bool(k, v); }},
      {"search.allow_negative_scales",
       [](auto& c, auto& k, auto& v) { c.search.allow_negative_scales = to_bool(k, v); }},
  };
  return table;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

GrayImage prepare(const GrayImage& img) { return normalize_l2(img); }

}  // namespace

const char* to_string(Classifier c) {
  switch (c) {
    case Classifier::IAC: return "IAC";
    case Classifier::IAC_FLIPS: return "IAC_FLIPS";
    case Classifier::CNN_EXPLICIT: return "CNN_EXPLICIT";
    case Classifier::CNN_TRAINED: return "CNN_TRAINED";
  }
  return "?";
}

Classifier parse_classifier(const std::string& name) {
  for (Classifier c : {Classifier::IAC, Classifier::IAC_FLIPS, Classifier::CNN_EXPLICIT,
                       Classifier::CNN_TRAINED})
    if (name == to_string(c)) return c;
  config_error("unknown classifier '" + name + "'");
}

TemplateFunction parse_template(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) config_error("template '" + spec + "' lacks 'kind:args'");
  const std::string kind = trim(spec.substr(0, colon));
  std::vector<double> a;
  for (const auto& p : split(spec.substr(colon + 1), ',')) a.push_back(to_double("template", p));
  try {
    if (kind == "tent" && (a.size() == 1 || a.size() == 3))
      return a.size() == 1 ? TemplateFunction::tent(a[0]) : TemplateFunction::tent(a[0], a[1], a[2]);
    if (kind == "cone" && (a.size() == 1 || a.size() == 3))
      return a.size() == 1 ? TemplateFunction::cone(a[0]) : TemplateFunction::cone(a[0], a[1], a[2]);
    if (kind == "cross" && (a.size() == 2 || a.size() == 4))
      return a.size() == 2 ? TemplateFunction::cross(a[0], a[1])
                           : TemplateFunction::cross(a[0], a[1], a[2], a[3]);
  } catch (const Error& e) {
    config_error("template '" + spec + "': " + e.what());
  }
  config_error("template '" + spec + "': unknown kind or wrong argument count");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      config_error("line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) config_error("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    it->second(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.n_list.empty()) config_error("experiment.n_list must not be empty");
  for (int n : cfg.n_list)
    if (n < 1) config_error("experiment.n_list entries must be >= 1");
  if (cfg.repetitions < 1) config_error("experiment.repetitions must be >= 1");
  if (cfg.n_test < 1) config_error("experiment.n_test must be >= 1");
  if (cfg.d < 4) config_error("experiment.d must be >= 4");
  if (cfg.align_m != 0 && cfg.align_m < 2) config_error("align.m must be 0 or >= 2");
  if (cfg.align_threshold < 0) config_error("align.threshold must be >= 0");
  if (cfg.cnn_Xi < 1) config_error("cnn.Xi must be >= 1");
  if (cfg.cnn_beta < 0) config_error("cnn.beta must be >= 0");
  if (cfg.arch.n_filters < 1 || cfg.arch.filter_size < 1 || !(cfg.arch.beta > 0))
    config_error("cnn architecture values must be positive");
  for (int w : cfg.arch.hidden)
    if (w < 1) config_error("cnn.hidden widths must be positive");
  if (cfg.opt.epochs < 0 || cfg.opt.batch_size < 1 || !(cfg.opt.learning_rate > 0))
    config_error("cnn optimizer values out of range");
  try {
    datagen::validate(cfg.q);
  } catch (const Error& e) {
    config_error(e.what());
  }
  switch (cfg.task) {
    case TaskKind::TwoTemplates:
      if (cfg.templates0.size() != 1 || cfg.templates1.size() != 1)
        config_error("two_templates needs exactly one template per class");
      break;
    case TaskKind::MultiTemplate:
      if (cfg.templates0.empty() || cfg.templates1.empty())
        config_error("multi_template needs at least one template per class");
      break;
    case TaskKind::MnistPair:
      if (cfg.mnist_images.empty() || cfg.mnist_labels.empty())
        config_error("mnist_pair needs mnist.images and mnist.labels");
      if (cfg.mnist_templates < 1) config_error("mnist.templates must be >= 1");
      if (cfg.mnist_class_a == cfg.mnist_class_b) config_error("mnist classes must differ");
      break;
  }
  if (cfg.task != TaskKind::MnistPair) {
    for (const auto& t : cfg.templates0) parse_template(t);
    for (const auto& t : cfg.templates1) parse_template(t);
  }
}

std::pair<std::vector<TemplateFunction>, std::vector<TemplateFunction>> task_templates(
    const ExperimentConfig& cfg) {
  std::vector<TemplateFunction> c0, c1;
  if (cfg.task != TaskKind::MnistPair) {
    for (const auto& t : cfg.templates0) c0.push_back(parse_template(t));
    for (const auto& t : cfg.templates1) c1.push_back(parse_template(t));
    return {c0, c1};
  }
  const io::MnistSet set = io::load_mnist(cfg.mnist_images, cfg.mnist_labels);
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    const auto& img = set.images[i];
    std::vector<double> grid(img.pixels().begin(), img.pixels().end());
    if (set.labels[i] == cfg.mnist_class_a && static_cast<int>(c0.size()) < cfg.mnist_templates)
      c0.push_back(TemplateFunction::raster(grid, img.d()));
    else if (set.labels[i] == cfg.mnist_class_b && static_cast<int>(c1.size()) < cfg.mnist_templates)
      c1.push_back(TemplateFunction::raster(grid, img.d()));
  }
  if (c0.empty() || c1.empty()) throw Error(ErrorCode::EmptyDataset, "MNIST file lacks a requested class");
  return {c0, c1};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<Aggregate> RiskReport::aggregates() const {
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Aggregate& a) { return a.classifier == r.classifier && a.n == r.n; });
    if (it == out.end()) {
      out.push_back({r.classifier, r.n, 0.0, 0});
      values.emplace_back();
      it = out.end() - 1;
    }
    if (!r.error) values[static_cast<std::size_t>(it - out.begin())].push_back(r.risk);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].median = median(values[i]);
    out[i].count = static_cast<int>(values[i].size());
  }
  return out;
}

RiskReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto [c0, c1] = task_templates(cfg);
  const int R = cfg.repetitions;
  const auto N = cfg.n_list.size();
  auto wants = [&](Classifier c) {
    return std::find(cfg.classifiers.begin(), cfg.classifiers.end(), c) != cfg.classifiers.end();
  };
  auto q_with_seed = [&](std::uint64_t seed) {
    datagen::DeformDistribution q = cfg.q;
    q.seed = seed;
    return q;
  };

  // One test set per repetition, shared by every n.
  std::vector<datagen::Dataset> tests(static_cast<std::size_t>(R));
  std::vector<std::vector<GrayImage>> tests_norm(static_cast<std::size_t>(R));
  std::vector<std::optional<std::string>> test_error(static_cast<std::size_t>(R));
  parallel_for(tests.size(), [&](std::size_t rep) {
    try {
      tests[rep] = datagen::generate_dataset(c0, c1, q_with_seed(derive_seed(cfg.seed, {kTestSalt, rep})),
                                             cfg.n_test, 0.5, cfg.d);
      for (const auto& it : tests[rep].items) tests_norm[rep].push_back(prepare(it.image));
    } catch (const Error& e) {
      test_error[rep] = std::string("test set: ") + e.what();
    }
  });

  // cell[(c * N + ni) * R + rep]
  std::vector<RiskRow> cells(cfg.classifiers.size() * N * static_cast<std::size_t>(R));
  auto cell = [&](std::size_t ci, std::size_t ni, int rep) -> RiskRow& {
    return cells[(ci * N + ni) * static_cast<std::size_t>(R) + static_cast<std::size_t>(rep)];
  };
  for (std::size_t ci = 0; ci < cfg.classifiers.size(); ++ci)
    for (std::size_t ni = 0; ni < N; ++ni)
      for (int rep = 0; rep < R; ++rep) {
        RiskRow& r = cell(ci, ni, rep);
        r.classifier = cfg.classifiers[ci];
        r.n = cfg.n_list[ni];
        r.repetition = rep;
      }
  auto record = [&](Classifier c, std::size_t ni, int rep, int errors) {
    for (std::size_t ci = 0; ci < cfg.classifiers.size(); ++ci)
      if (cfg.classifiers[ci] == c) {
        RiskRow& r = cell(ci, ni, rep);
        r.errors = errors;
        r.risk = static_cast<double>(errors) / cfg.n_test;
      }
  };
  auto fail = [&](Classifier c, std::size_t ni, int rep, const std::string& what) {
    for (std::size_t ci = 0; ci < cfg.classifiers.size(); ++ci)
      if (cfg.classifiers[ci] == c) cell(ci, ni, rep).error = what;
  };

  // The explicit CNN does not depend on training data: one pass per repetition.
  if (wants(Classifier::CNN_EXPLICIT)) {
    auto bank = std::make_shared<const cnn::FilterBank>(
        cnn::build_filter_bank(c0.front(), c1.front(), cfg.cnn_Xi, cfg.d));
    const cnn::ExplicitClassifier clf(bank);
    const double beta = cfg.cnn_beta > 0 ? cfg.cnn_beta : cfg.d;
    for (int rep = 0; rep < R; ++rep) {
      if (test_error[static_cast<std::size_t>(rep)]) continue;
      try {
        const auto out = clf.classify_batch(tests_norm[static_cast<std::size_t>(rep)], beta);
        int errors = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
          errors += out[i].label != tests[static_cast<std::size_t>(rep)].items[i].label;
        for (std::size_t ni = 0; ni < N; ++ni) record(Classifier::CNN_EXPLICIT, ni, rep, errors);
      } catch (const Error& e) {
        for (std::size_t ni = 0; ni < N; ++ni) fail(Classifier::CNN_EXPLICIT, ni, rep, e.what());
      }
    }
  }

  parallel_for(static_cast<std::size_t>(R) * N, [&](std::size_t item) {
    const int rep = static_cast<int>(item / N);
    const std::size_t ni = item % N;
    const int n = cfg.n_list[ni];
    if (const auto& err = test_error[static_cast<std::size_t>(rep)]) {
      for (Classifier c : cfg.classifiers) fail(c, ni, rep, *err);
      return;
    }
    const auto& test = tests[static_cast<std::size_t>(rep)];
    const auto& test_norm = tests_norm[static_cast<std::size_t>(rep)];
    const auto train_seed = derive_seed(cfg.seed, {kTrainSalt, static_cast<std::uint64_t>(rep),
                                                   static_cast<std::uint64_t>(n)});
    datagen::Dataset train;
    try {
      train = datagen::generate_dataset(c0, c1, q_with_seed(train_seed), n, 0.5, cfg.d);
    } catch (const Error& e) {
      for (Classifier c : cfg.classifiers)
        if (c != Classifier::CNN_EXPLICIT) fail(c, ni, rep, e.what());
      return;
    }
    const int m = cfg.align_m > 0 ? cfg.align_m : cfg.d;
    const bool thresholded = cfg.align_threshold > 0.0;

    if (wants(Classifier::IAC) || wants(Classifier::IAC_FLIPS)) {
      try {
        datagen::Dataset gallery_src = train;
        if (thresholded)
          for (auto& it : gallery_src.items) it.image = prepare(it.image);
        const auto gallery = align::build_gallery(gallery_src, m, cfg.align_threshold);
        int err_plain = 0, err_flips = 0;
        for (std::size_t i = 0; i < test.items.size(); ++i) {
          const GrayImage& x = thresholded ? test_norm[i] : test.items[i].image;
          const int truth = test.items[i].label;
          if (wants(Classifier::IAC))
            err_plain += align::classify_1nn(gallery, align::transform(x, m, cfg.align_threshold)).label != truth;
          if (wants(Classifier::IAC_FLIPS))
            err_flips += align::classify_1nn_flips(gallery, x, m, cfg.align_threshold).label != truth;
        }
        record(Classifier::IAC, ni, rep, err_plain);
        record(Classifier::IAC_FLIPS, ni, rep, err_flips);
      } catch (const Error& e) {
        fail(Classifier::IAC, ni, rep, e.what());
        fail(Classifier::IAC_FLIPS, ni, rep, e.what());
      }
    }

    if (wants(Classifier::CNN_TRAINED)) {
      try {
        datagen::Dataset norm = train;
        for (auto& it : norm.items) it.image = prepare(it.image);
        cnn::OptimizerConfig opt = cfg.opt;
        opt.seed = derive_seed(cfg.seed, {kCnnSalt, static_cast<std::uint64_t>(rep),
                                          static_cast<std::uint64_t>(n)});
        const auto net = cnn::train_least_squares(norm, cfg.arch, opt);
        int errors = 0;
        for (std::size_t i = 0; i < test.items.size(); ++i)
          errors += net.predict(test_norm[i]) != test.items[i].label;
        record(Classifier::CNN_TRAINED, ni, rep, errors);
      } catch (const Error& e) {
        fail(Classifier::CNN_TRAINED, ni, rep, e.what());
      }
    }
  });

  RiskReport report;
  report.n_test = cfg.n_test;
  report.rows = std::move(cells);
  return report;
}

std::string emit_report(const RiskReport& report, ReportFormat format, ReportTable table) {
  std::vector<std::vector<std::string>> grid;
  if (table == ReportTable::Raw) {
    grid.push_back({"classifier", "n", "repetition", "R_N"});
    for (const auto& r : report.rows)
      grid.push_back({to_string(r.classifier), std::to_string(r.n), std::to_string(r.repetition),
                      r.error ? "NA" : fixed6(r.risk)});
  } else {
    grid.push_back({"classifier", "n", "median_R_N"});
    for (const auto& a : report.aggregates())
      grid.push_back({to_string(a.classifier), std::to_string(a.n), fixed6(a.median)});
  }
  std::ostringstream os;
  if (format == ReportFormat::Csv) {
    for (const auto& row : grid) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << '\n';
    }
    return os.str();
  }
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& row : grid)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t i = 0; i < grid[r].size(); ++i) {
      if (i) os << "  ";
      // text columns left-aligned, numbers right-aligned
      if (i == 0) os << std::left << std::setw(static_cast<int>(width[i])) << grid[r][i];
      else os << std::right << std::setw(static_cast<int>(width[i])) << grid[r][i];
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace deformclass::harness
