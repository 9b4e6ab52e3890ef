#include <doctest.h>

#include <cmath>

#include "deformclass/error.hpp"
#include "deformclass/harness.hpp"

using namespace deformclass;
using namespace deformclass::harness;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidParams;
}

ExperimentConfig small() {
  return parse_config(R"(
# small IAC run
experiment.n_list = 2,4
experiment.n_test = 20
experiment.repetitions = 3
experiment.d = 32
experiment.seed = 42
experiment.classifiers = IAC,IAC_FLIPS
q.eta_range = 0.8,1.2
q.xi_range = 1.0,1.5
q.xi_prime_range = 1.0,1.5
)");
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = small();
  CHECK(cfg.n_list == std::vector<int>{2, 4});
  CHECK(cfg.n_test == 20);
  CHECK(cfg.d == 32);
  CHECK(cfg.seed == 42);
  CHECK(cfg.classifiers == std::vector<Classifier>{Classifier::IAC, Classifier::IAC_FLIPS});
  CHECK(cfg.q.eta_range == std::pair{0.8, 1.2});

  const auto more = parse_config(
      "experiment.task=multi_template\nexperiment.templates0=tent:0.2;cone:0.2,0.45,0.5\n"
      "experiment.templates1=cross:0.25,0.08\ncnn.hidden=none\ncnn.filters=4\nsearch.nonneg_a=false\n"
      "cnn.learning_rate=0.005\nalign.threshold=0.01\n");
  CHECK(more.task == TaskKind::MultiTemplate);
  CHECK(more.templates0.size() == 2);
  CHECK(more.arch.hidden.empty());
  CHECK(more.arch.n_filters == 4);
  CHECK_FALSE(more.search.nonneg_a);
  CHECK(more.opt.learning_rate == 0.005);
  CHECK(task_templates(more).first.size() == 2);
}

TEST_CASE("config errors") {
  CHECK(code_of([] { parse_config("experiment.bogus=1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.d\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.d=sixty\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.n_list=\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.n_list=2,0\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.repetitions=0\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("q.xi_range=0.3,1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.classifiers=KNN\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.template0=blob:1\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.template0=tent:0.4\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_config("experiment.task=mnist_pair\n"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { load_config("/nonexistent/config.cfg"); }) == ErrorCode::ConfigError);
  CHECK(exit_status(ErrorCode::ConfigError) == 2);
}

TEST_CASE("template specs") {
  const auto t = parse_template("tent:0.2,0.45,0.5");
  CHECK(t(0.45, 0.5) == doctest::Approx(0.2));
  CHECK(parse_template("cone:0.2")(0.5, 0.5) == doctest::Approx(0.2));
  CHECK(parse_template("cross:0.25,0.08")(0.5, 0.7) == doctest::Approx(0.05));
  CHECK(code_of([] { parse_template("tent"); }) == ErrorCode::ConfigError);
  CHECK(code_of([] { parse_template("cross:0.25"); }) == ErrorCode::ConfigError);
  CHECK(std::string(to_string(parse_classifier("CNN_TRAINED"))) == "CNN_TRAINED");
}

TEST_CASE("run_experiment rows") {
  const auto cfg = small();
  const auto rep = run_experiment(cfg);
  REQUIRE(rep.rows.size() == 2 * 2 * 3);
  for (const auto& r : rep.rows) {
    CHECK_FALSE(r.error);
    CHECK(r.risk >= 0.0);
    CHECK(r.risk <= 1.0);
    CHECK(std::abs(r.risk * cfg.n_test - std::round(r.risk * cfg.n_test)) <= 1e-9);
    CHECK(r.risk == static_cast<double>(r.errors) / cfg.n_test);
  }
  // ordered by classifier, n, repetition
  CHECK(rep.rows[0].classifier == Classifier::IAC);
  CHECK(rep.rows[0].n == 2);
  CHECK(rep.rows[1].repetition == 1);
  CHECK(rep.rows[3].n == 4);
  CHECK(rep.rows[6].classifier == Classifier::IAC_FLIPS);
  CHECK(rep.aggregates().size() == 4);
}

TEST_CASE("determinism and seed isolation") {
  auto cfg = small();
  const auto a = emit_report(run_experiment(cfg));
  CHECK(a == emit_report(run_experiment(cfg)));
  // adding repetitions leaves the existing rows untouched
  cfg.repetitions = 4;
  cfg.classifiers = {Classifier::IAC};
  const auto longer = run_experiment(cfg);
  cfg.repetitions = 3;
  const auto shorter = run_experiment(cfg);
  for (const auto& r : shorter.rows) {
    bool found = false;
    for (const auto& l : longer.rows)
      if (l.n == r.n && l.repetition == r.repetition) {
        CHECK(l.errors == r.errors);
        found = true;
      }
    CHECK(found);
  }
}

TEST_CASE("no classifiers gives an empty report") {
  auto cfg = small();
  cfg.classifiers.clear();
  const auto rep = run_experiment(cfg);
  CHECK(rep.rows.empty());
  CHECK(emit_report(rep) == "classifier,n,repetition,R_N\n");
  CHECK(emit_report(rep, ReportFormat::Csv, ReportTable::Aggregate) == "classifier,n,median_R_N\n");
}

TEST_CASE("report formats") {
  RiskReport rep;
  rep.n_test = 100;
  rep.rows.push_back({Classifier::IAC, 2, 0, 0.0, 0, {}});
  CHECK(emit_report(rep) == "classifier,n,repetition,R_N\nIAC,2,0,0.000000\n");
  rep.rows.push_back({Classifier::IAC, 2, 1, 0.0, 0, std::string("boom")});
  CHECK(emit_report(rep).find("IAC,2,1,NA\n") != std::string::npos);
  const auto pretty = emit_report(rep, ReportFormat::Pretty, ReportTable::Raw);
  CHECK(pretty.find("classifier") == 0);
  CHECK(pretty.find("---") != std::string::npos);
  const auto agg = rep.aggregates();
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].count == 1);
}

TEST_CASE("median convention") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({0.1, 0.4, 0.2, 0.3}) == doctest::Approx(0.25));
  RiskReport rep;
  for (int i = 0; i < 30; ++i) rep.rows.push_back({Classifier::IAC, 2, i, i / 100.0, i, {}});
  CHECK(rep.aggregates()[0].median == doctest::Approx(0.145));
}

TEST_CASE("failing work items become error rows") {
  // at d = 8 a tiny tent misses every sample point
  auto cfg = parse_config(
      "experiment.template0=tent:0.01\nexperiment.n_list=2\nexperiment.n_test=4\n"
      "experiment.repetitions=2\nexperiment.d=8\nexperiment.classifiers=IAC\n");
  const auto rep = run_experiment(cfg);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) CHECK(r.error.has_value());
  CHECK(emit_report(rep).find("NA") != std::string::npos);
}

TEST_CASE("IAC on tent vs cross is near perfect") {
  auto cfg = parse_config(
      "experiment.n_list=2\nexperiment.repetitions=1\nexperiment.classifiers=IAC\n"
      "q.eta_range=0.8,1.2\nq.xi_range=1.0,1.5\nq.xi_prime_range=1.0,1.5\n");
  const auto rep = run_experiment(cfg);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].risk <= 0.02);
}

TEST_CASE("trained CNN on tent vs cross at d = 28") {
  auto cfg = parse_config(
      "experiment.n_list=64\nexperiment.n_test=100\nexperiment.repetitions=30\nexperiment.d=28\n"
      "experiment.seed=3\nexperiment.classifiers=CNN_TRAINED\ncnn.filters=28\ncnn.filter_size=3\ncnn.hidden=128\n");
  const auto agg = run_experiment(cfg).aggregates();
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].count == 30);
  CHECK(agg[0].median <= 0.25);
}
