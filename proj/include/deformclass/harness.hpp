#pragma once

// Experiment runner: tasks, sample-size sweeps over repetitions, risk reports,
// and the key=value configuration format used by the CLI.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deformclass/datagen.hpp"
#include "deformclass/separation.hpp"
#include "deformclass/trainable.hpp"

namespace deformclass::harness {

enum class Classifier { IAC, IAC_FLIPS, CNN_EXPLICIT, CNN_TRAINED };

const char* to_string(Classifier c);
/// Throws ConfigError on an unknown name.
Classifier parse_classifier(const std::string& name);

/// "tent:delta[,cx,cy]", "cone:radius[,cx,cy]", "cross:half_length,half_width[,cx,cy]".
/// Throws ConfigError.
TemplateFunction parse_template(const std::string& spec);

enum class TaskKind { TwoTemplates, MultiTemplate, MnistPair };

struct ExperimentConfig {
  TaskKind task = TaskKind::TwoTemplates;
  std::vector<std::string> templates0{"tent:0.25"};
  std::vector<std::string> templates1{"cross:0.25,0.083333333333333333"};
  std::vector<int> n_list{2, 4, 8, 16, 32, 64};
  int n_test = 100;
  int repetitions = 30;
  int d = 64;
  std::uint64_t seed = 0;
  std::vector<Classifier> classifiers{Classifier::IAC};

  /// Q; q.seed is ignored (streams derive from seed above).
  datagen::DeformDistribution q{{0.8, 1.2}, {1.0, 1.5}, {1.0, 1.5}, 0.0, 0};

  int align_m = 0;  ///< 0 means m = d
  double align_threshold = 0.0;

  int cnn_Xi = 2;
  double cnn_beta = 0.0;  ///< explicit classifier temperature; 0 means beta = d
  cnn::Architecture arch;
  cnn::OptimizerConfig opt;

  std::string mnist_images, mnist_labels;
  int mnist_class_a = 0, mnist_class_b = 1;
  int mnist_templates = 1;  ///< raster templates per class (first occurrences)

  separation::SearchConfig search;
};

/// Parses "key=value" lines ('#' starts a comment). Unknown keys, malformed
/// values and violated invariants throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Checks n_list non-empty with all entries >= 1, repetitions >= 1, etc.
void validate(const ExperimentConfig& cfg);

/// Class templates as used by run_experiment (MNIST tasks read the IDX files).
std::pair<std::vector<TemplateFunction>, std::vector<TemplateFunction>> task_templates(
    const ExperimentConfig& cfg);

struct RiskRow {
  Classifier classifier = Classifier::IAC;
  int n = 0;
  int repetition = 0;
  double risk = 0.0;  ///< R_N = errors / n_test
  int errors = 0;
  std::optional<std::string> error;  ///< set when this work item failed
};

struct Aggregate {
  Classifier classifier = Classifier::IAC;
  int n = 0;
  double median = 0.0;
  int count = 0;
};

struct RiskReport {
  std::vector<RiskRow> rows;  ///< ordered by classifier (config order), n, repetition
  int n_test = 0;
  std::vector<Aggregate> aggregates() const;
};

/// Median; the mean of the two central values for even counts.
double median(std::vector<double> v);

/// Runs every (repetition, n) work item. Deterministic given cfg.seed and
/// independent of the worker count.
RiskReport run_experiment(const ExperimentConfig& cfg);

enum class ReportFormat { Csv, Pretty };
enum class ReportTable { Raw, Aggregate };
std::string emit_report(const RiskReport& report, ReportFormat format = ReportFormat::Csv,
                        ReportTable table = ReportTable::Raw);

}  // namespace deformclass::harness
