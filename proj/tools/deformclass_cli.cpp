// deformclass command line: gen, align, cnn, sep, bench.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "deformclass/align.hpp"
#include "deformclass/cnn.hpp"
#include "deformclass/datagen.hpp"
#include "deformclass/error.hpp"
#include "deformclass/geometry.hpp"
#include "deformclass/harness.hpp"
#include "deformclass/io.hpp"
#include "deformclass/separation.hpp"
#include "deformclass/trainable.hpp"

namespace fs = std::filesystem;
using namespace deformclass;

namespace {

harness::ExperimentConfig config_or_default(const std::string& path) {
  return path.empty() ? harness::ExperimentConfig{} : harness::load_config(path);
}

// Reads a dataset directory written by `gen`.
datagen::Dataset read_dataset(const std::string& dir) {
  const auto text = io::read_file((fs::path(dir) / "manifest.csv").string());
  const auto rows = io::parse_manifest(std::string(text.begin(), text.end()));
  datagen::Dataset ds;
  for (const auto& r : rows) {
    datagen::LabeledImage it;
    it.image = io::read_pgm(io::read_file((fs::path(dir) / r.file).string()));
    it.label = r.label;
    it.template_index = r.template_index;
    it.params = r.params;
    if (ds.d == 0) ds.d = it.image.d();
    if (it.image.d() != ds.d) throw Error(ErrorCode::DimMismatch, "dataset images differ in size");
    ds.items.push_back(std::move(it));
  }
  if (ds.items.empty()) throw Error(ErrorCode::EmptyDataset, "dataset " + dir + " has no images");
  return ds;
}

GrayImage read_query(const std::string& path) { return io::read_pgm(io::read_file(path)); }

double template_gamma(const TemplateFunction& f, int d, int points, long long budget) {
  const GrayImage img = rasterize(f, DeformParams::identity(), d);
  const auto curve = geometry::resample_arclength(geometry::trace_boundary(geometry::support_mask(img)), points);
  return geometry::estimate_gamma(curve, budget);
}

int run(int argc, char** argv) {
  CLI::App app{"Deformation-model image classification toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Write a generated dataset (manifest.csv + PGM files)");
  std::string gen_config, gen_out, gen_scale = "max";
  int gen_n = 10;
  double gen_pi = 0.5;
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  gen->add_option("--config", gen_config, "Experiment config supplying templates, d and Q");
  gen->add_option("-n,--count", gen_n, "Number of images")->check(CLI::PositiveNumber);
  gen->add_option("--pi", gen_pi, "P(label = 1)")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", gen_seed, "Seed (defaults to experiment.seed)")->each([&](const std::string&) {
    gen_seed_set = true;
  });
  gen->add_option("--pgm-scale", gen_scale, "PGM scaling: max or fixed")->check(CLI::IsMember({"max", "fixed"}));
  gen->add_option("-o,--out", gen_out, "Output directory")->required();

  // align
  auto* al = app.add_subcommand("align", "Classify PGM queries by 1-NN on aligned representations");
  std::string al_gallery;
  std::vector<std::string> al_queries;
  int al_m = 0;
  double al_threshold = 0.0;
  bool al_flips = false;
  al->add_option("--gallery", al_gallery, "Dataset directory written by gen")->required();
  al->add_option("queries", al_queries, "Query PGM files")->required();
  al->add_option("-m", al_m, "Alignment resolution (0 = image size)");
  al->add_option("--threshold", al_threshold, "Support level set threshold on normalized images");
  al->add_flag("--flips", al_flips, "Also match the three flipped variants");

  // cnn
  auto* cn = app.add_subcommand("cnn", "Explicit filter-bank CNN and trained least-squares CNN");
  cn->require_subcommand(1);
  auto* cn_explicit = cn->add_subcommand("explicit", "Build the filter bank and classify queries");
  std::string ce_t0 = "tent:0.25", ce_t1 = "cross:0.25,0.083333333333333333";
  int ce_Xi = 2, ce_d = 64;
  double ce_beta = 0.0;
  std::vector<std::string> ce_queries;
  cn_explicit->add_option("--template0", ce_t0, "Class 0 template");
  cn_explicit->add_option("--template1", ce_t1, "Class 1 template");
  cn_explicit->add_option("--Xi", ce_Xi, "Scale range")->check(CLI::PositiveNumber);
  cn_explicit->add_option("--d", ce_d, "Image size")->check(CLI::PositiveNumber);
  cn_explicit->add_option("--beta", ce_beta, "Softmax temperature (0 = d)");
  cn_explicit->add_option("queries", ce_queries, "Query PGM files");

  auto* cn_train = cn->add_subcommand("train", "Train a CNN on a dataset directory and save a checkpoint");
  std::string ct_data, ct_out, ct_config;
  cn_train->add_option("--data", ct_data, "Dataset directory written by gen")->required();
  cn_train->add_option("--config", ct_config, "Config supplying cnn.* settings");
  cn_train->add_option("-o,--out", ct_out, "Checkpoint path")->required();

  auto* cn_classify = cn->add_subcommand("classify", "Classify queries with a saved checkpoint");
  std::string cc_ckpt;
  std::vector<std::string> cc_queries;
  cn_classify->add_option("--checkpoint", cc_ckpt, "Checkpoint path")->required();
  cn_classify->add_option("queries", cc_queries, "Query PGM files")->required();

  // sep
  auto* sp = app.add_subcommand("sep", "Estimate the separation D and the Gamma values of two templates");
  std::string sp_t0 = "tent:0.25", sp_t1 = "cross:0.25,0.083333333333333333", sp_config;
  int sp_gamma_d = 256, sp_points = 256;
  long long sp_budget = 0;
  sp->add_option("--template0", sp_t0, "First template");
  sp->add_option("--template1", sp_t1, "Second template");
  sp->add_option("--config", sp_config, "Config supplying search.* settings");
  sp->add_option("--gamma-d", sp_gamma_d, "Raster size used to trace the support boundary");
  sp->add_option("--gamma-points", sp_points, "Boundary points after arclength resampling");
  sp->add_option("--gamma-budget", sp_budget, "Pair budget for the Gamma estimate (0 = all pairs)");

  // bench
  auto* be = app.add_subcommand("bench", "Run an experiment from a config file and write CSV");
  std::string be_config, be_out;
  bool be_aggregate = false, be_pretty = false;
  be->add_option("config", be_config, "Config file")->required();
  be->add_option("-o,--out", be_out, "Output file (default stdout)");
  be->add_flag("--aggregate", be_aggregate, "Emit medians per (classifier, n)");
  be->add_flag("--pretty", be_pretty, "Aligned table instead of CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    const auto cfg = config_or_default(gen_config);
    auto [c0, c1] = harness::task_templates(cfg);
    auto q = cfg.q;
    q.seed = gen_seed_set ? gen_seed : cfg.seed;
    const auto ds = datagen::generate_dataset(c0, c1, q, gen_n, gen_pi, cfg.d);
    io::write_dataset(gen_out, ds, gen_scale == "max" ? io::PgmScale::PerImageMax : io::PgmScale::Fixed);
    std::cout << "wrote " << ds.items.size() << " images to " << gen_out << "\n";
    return 0;
  }

  if (al->parsed()) {
    datagen::Dataset ds = read_dataset(al_gallery);
    const int m = al_m > 0 ? al_m : ds.d;
    if (al_threshold > 0)
      for (auto& it : ds.items) it.image = normalize_l2(it.image);
    const auto gallery = align::build_gallery(ds, m, al_threshold);
    std::cout << "query,label,index,distance,variant\n";
    for (const auto& path : al_queries) {
      GrayImage x = read_query(path);
      if (al_threshold > 0) x = normalize_l2(x);
      const auto match = al_flips ? align::classify_1nn_flips(gallery, x, m, al_threshold)
                                  : align::classify_1nn(gallery, align::transform(x, m, al_threshold));
      std::printf("%s,%d,%d,%.9g,%d\n", path.c_str(), match.label, match.index, match.distance,
                  match.variant);
    }
    return 0;
  }

  if (cn_explicit->parsed()) {
    auto bank = std::make_shared<const cnn::FilterBank>(
        cnn::build_filter_bank(harness::parse_template(ce_t0), harness::parse_template(ce_t1), ce_Xi, ce_d));
    std::cerr << "filter bank: " << bank->non_null() << " non-null filters of " << bank->filters.size() << "\n";
    const cnn::ExplicitClassifier clf(bank);
    const double beta = ce_beta > 0 ? ce_beta : ce_d;
    std::cout << "query,z0,z1,p0,p1,label\n";
    for (const auto& path : ce_queries) {
      const auto out = clf.classify(normalize_l2(read_query(path)), beta);
      std::printf("%s,%.9g,%.9g,%.9g,%.9g,%d\n", path.c_str(), out.z0, out.z1, out.p0, out.p1, out.label);
    }
    return 0;
  }

  if (cn_train->parsed()) {
    const auto cfg = config_or_default(ct_config);
    datagen::Dataset ds = read_dataset(ct_data);
    for (auto& it : ds.items) it.image = normalize_l2(it.image);
    auto opt = cfg.opt;
    opt.seed = cfg.seed;
    cnn::TrainLog log;
    const auto net = cnn::train_least_squares(ds, cfg.arch, opt, &log);
    net.save_file(ct_out);
    if (!log.epoch_loss.empty()) std::cerr << "final epoch loss " << log.epoch_loss.back() << "\n";
    std::cout << "saved " << net.num_params() << " parameters to " << ct_out << "\n";
    return 0;
  }

  if (cn_classify->parsed()) {
    const auto net = cnn::TrainableCnn::load_file(cc_ckpt);
    std::cout << "query,p0,p1,label\n";
    for (const auto& path : cc_queries) {
      const auto [p0, p1] = net.forward(normalize_l2(read_query(path)));
      std::printf("%s,%.9g,%.9g,%d\n", path.c_str(), p0, p1, p1 > p0 ? 1 : 0);
    }
    return 0;
  }

  if (sp->parsed()) {
    const auto cfg = config_or_default(sp_config);
    const auto f = harness::parse_template(sp_t0);
    const auto g = harness::parse_template(sp_t1);
    const auto r = separation::estimate_D(f, g, cfg.search);
    std::printf("D_fg=%.9g\nD_gf=%.9g\nD=%.9g\n", r.d_fg, r.d_gf, r.d_max);
    std::printf("gamma0=%.9g\ngamma1=%.9g\n", template_gamma(f, sp_gamma_d, sp_points, sp_budget),
                template_gamma(g, sp_gamma_d, sp_points, sp_budget));
    return 0;
  }

  if (be->parsed()) {
    const auto cfg = harness::load_config(be_config);
    if (cfg.classifiers.empty()) std::cerr << "warning: no classifiers requested, report is empty\n";
    const auto report = harness::run_experiment(cfg);
    const auto text = harness::emit_report(report, be_pretty ? harness::ReportFormat::Pretty : harness::ReportFormat::Csv,
                                           be_aggregate ? harness::ReportTable::Aggregate : harness::ReportTable::Raw);
    for (const auto& row : report.rows)
      if (row.error) std::cerr << "error: " << harness::to_string(row.classifier) << " n=" << row.n
                               << " rep=" << row.repetition << ": " << *row.error << "\n";
    if (be_out.empty()) {
      std::cout << text;
    } else {
      io::write_file(be_out, io::Bytes(text.begin(), text.end()));
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
