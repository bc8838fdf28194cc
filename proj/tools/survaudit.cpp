#include <omp.h>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survaudit/experiment.hpp"
#include "survaudit/fairness.hpp"
#include "survaudit/km.hpp"
#include "survaudit/rng.hpp"

namespace {

using namespace survaudit;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

std::vector<Measure> parse_measures(const std::string& csv) {
  std::vector<Measure> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_measure(item));
  }
  if (out.empty()) throw DataError("no measures given");
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo, hi, step;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0) {
    throw DataError("grid must be lo:hi:step with step > 0, got '" + spec + "'");
  }
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + 1e-12) break;
    grid.push_back(v);
  }
  if (grid.empty()) throw DataError("empty sigma grid");
  return grid;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

struct CommonOpts {
  std::string time_col = "time";
  std::string status_col = "status";
  std::string group_col = "group";
  std::string measures = "rsbs,risl,snl,rcll,charrell,cuno,cala,cald";
  int trees = 100;
  int jobs = 0;
  std::uint64_t seed = 42;
};

int run_synth(std::size_t n, std::size_t p, double censoring, double shape,
              double scale, std::size_t groups, std::uint64_t seed,
              const std::string& out) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.target_censoring = censoring;
  cfg.baseline_shape = shape;
  cfg.baseline_scale = scale;
  cfg.group_count = groups;
  const SurvivalDataset ds = generate_synthetic(cfg, seed);
  save_csv(ds, out);
  std::cout << "wrote " << ds.n_rows << " rows, " << ds.n_features
            << " features, censoring "
            << 1.0 - static_cast<double>(ds.event_count()) / ds.n_rows << " -> "
            << out << "\n";
  return kExitOk;
}

int run_audit(const CommonOpts& common, const std::string& input, double train_frac,
              const std::string& out) {
  CsvSchema schema{common.time_col, common.status_col, common.group_col};
  const SurvivalDataset ds = load_csv(input, schema);
  if (!ds.group) {
    std::cerr << "audit: dataset has no group column '" << common.group_col << "'\n";
    return kExitData;
  }
  const auto labels = group_labels(ds);
  if (labels.size() != 2) {
    std::cerr << "audit: group column '" << common.group_col << "' has "
              << labels.size() << " labels, need exactly 2\n";
    return kExitData;
  }
  const auto measures = parse_measures(common.measures);

  auto [train, test] = split_random(ds, train_frac, common.seed);
  if (train.event_count() == 0 || test.event_count() == 0) {
    std::cerr << "audit: train or test split has no events\n";
    return kExitData;
  }
  RSFParams params;
  params.tree_count = common.trees;
  params.seed = derive_seed(common.seed, {0xa0d1});
  const RSFModel model = fit_rsf(train, params);
  const DistributionPrediction pred = predict_distribution(model, test);
  const RiskPrediction risk = predict_risk(model, test);
  const CensoringWeights G{fit_censoring_km(test.time, test.status)};
  const DistributionPrediction baseline =
      broadcast_curve(fit_km(train.time, train.status), test.n_rows);

  const auto results = audit_groups(pred, risk, test, measures, G, baseline);

  std::ostringstream report;
  report << "measure,loss_advantaged,loss_disadvantaged,gap,n_advantaged,"
            "n_disadvantaged,error\n";
  for (const FairnessResult& r : results) {
    report << measure_name(r.measure) << ',';
    if (r.error) {
      report << ",,," << r.n_advantaged << ',' << r.n_disadvantaged << ",\""
             << *r.error << "\"\n";
    } else {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g", r.loss_advantaged,
                    r.loss_disadvantaged, r.gap);
      report << buf << ',' << r.n_advantaged << ',' << r.n_disadvantaged << ",\n";
    }
  }
  if (out.empty()) {
    std::cout << report.str();
  } else {
    write_file(out, report.str());
    std::cout << "wrote " << out << "\n";
  }
  return kExitOk;
}

int run_experiment(const CommonOpts& common, const std::vector<std::string>& inputs,
                   int synth_count, std::size_t synth_n, std::size_t synth_p,
                   double synth_censoring, const std::string& method_name,
                   const std::string& grid_spec, int reps, int folds,
                   const std::string& out) {
  CsvSchema schema{common.time_col, common.status_col, common.group_col};
  std::vector<NamedDataset> datasets;
  for (const std::string& path : inputs) {
    datasets.push_back({path, load_csv(path, schema)});
  }
  for (int i = 0; i < synth_count; ++i) {
    SynthConfig cfg;
    cfg.n = synth_n;
    cfg.p = synth_p;
    cfg.target_censoring = synth_censoring;
    datasets.push_back(
        {"synth" + std::to_string(i),
         generate_synthetic(cfg, derive_seed(common.seed,
                                             {0x5e7, static_cast<std::uint64_t>(i)}))});
  }
  if (datasets.empty()) {
    std::cerr << "experiment: no input datasets (use --input or --synth)\n";
    return kExitUsage;
  }

  const auto measures = parse_measures(common.measures);
  const auto grid = parse_grid(grid_spec);
  const BiasMethod method = parse_bias_method(method_name);
  RSFParams params;
  params.tree_count = common.trees;
  BiasRunConfig config;
  config.repetitions = reps;
  config.folds = folds;
  config.seed = common.seed;

  const SweepResult sweep = sigma_sweep(datasets, grid, measures, method, params,
                                        config);
  write_sweep_csv(sweep, out + ".sweep.csv");
  if (!sweep.rows.empty()) {
    const Report report = build_report(sweep);
    write_file(out + ".stats.csv", report.render_stats_csv());
    write_file(out + ".report.txt", report.render_text());
    std::cout << report.render_text();
  }
  if (!sweep.failures.empty()) {
    for (const auto& [id, err] : sweep.failures) {
      std::cerr << "dataset '" << id << "' failed: " << err << "\n";
    }
    return kExitPartial;
  }
  return kExitOk;
}

int run_report(const std::string& input, const std::string& out) {
  const SweepResult sweep = read_sweep_csv(input);
  const Report report = build_report(sweep);
  if (out.empty()) {
    std::cout << report.render_text();
  } else {
    write_file(out + ".stats.csv", report.render_stats_csv());
    write_file(out + ".report.txt", report.render_text());
    std::cout << report.render_text();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Survival-model fairness auditing toolkit"};
  app.require_subcommand(1);

  CommonOpts common;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic survival dataset");
  std::size_t sy_n = 600, sy_p = 5, sy_groups = 1;
  double sy_cens = 0.3, sy_shape = 1.5, sy_scale = 10.0;
  std::string sy_out = "synthetic.csv";
  synth->add_option("--n", sy_n, "Observation count");
  synth->add_option("--p", sy_p, "Feature count");
  synth->add_option("--censoring", sy_cens, "Target censoring fraction in [0,1)")
      ->check(CLI::Range(0.0, 0.999999));
  synth->add_option("--shape", sy_shape, "Weibull baseline shape");
  synth->add_option("--scale", sy_scale, "Weibull baseline scale");
  synth->add_option("--groups", sy_groups, "Number of group labels");
  synth->add_option("--seed", common.seed, "RNG seed");
  synth->add_option("--out", sy_out, "Output CSV path");

  // audit
  auto* audit = app.add_subcommand("audit", "Fairness audit of a two-group dataset");
  std::string au_input, au_out;
  double au_train_frac = 0.5;
  audit->add_option("--input", au_input, "Input CSV")->required();
  audit->add_option("--time-col", common.time_col, "Time column name");
  audit->add_option("--status-col", common.status_col, "Status column name");
  audit->add_option("--group-col", common.group_col, "Group column name");
  audit->add_option("--measures", common.measures, "Comma-separated measure names");
  audit->add_option("--train-frac", au_train_frac, "Training fraction")
      ->check(CLI::Range(0.01, 0.99));
  audit->add_option("--trees", common.trees, "RSF tree count");
  audit->add_option("--seed", common.seed, "RNG seed");
  audit->add_option("--jobs", common.jobs, "Worker thread count (0 = default)");
  audit->add_option("--out", au_out, "Report CSV path (default: stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run the sigma bias-injection sweep");
  std::vector<std::string> ex_inputs;
  int ex_synth = 0, ex_reps = 10, ex_folds = 3;
  std::size_t ex_synth_n = 600, ex_synth_p = 5;
  double ex_synth_cens = 0.3;
  std::string ex_method = "permutation", ex_grid = "0:0.9:0.1", ex_out = "experiment";
  exp->add_option("--input", ex_inputs, "Input CSV (repeatable)");
  exp->add_option("--synth", ex_synth, "Number of synthetic datasets to generate");
  exp->add_option("--synth-n", ex_synth_n, "Synthetic observation count");
  exp->add_option("--synth-p", ex_synth_p, "Synthetic feature count");
  exp->add_option("--synth-censoring", ex_synth_cens, "Synthetic censoring fraction");
  exp->add_option("--time-col", common.time_col, "Time column name");
  exp->add_option("--status-col", common.status_col, "Status column name");
  exp->add_option("--group-col", common.group_col, "Group column name");
  exp->add_option("--measures", common.measures, "Comma-separated measure names");
  exp->add_option("--method", ex_method, "Biasing method")
      ->check(CLI::IsMember({"permutation", "undersampling"}));
  exp->add_option("--grid", ex_grid, "Sigma grid as lo:hi:step");
  exp->add_option("--reps", ex_reps, "Repetitions per cell");
  exp->add_option("--folds", ex_folds, "CV folds");
  exp->add_option("--trees", common.trees, "RSF tree count");
  exp->add_option("--seed", common.seed, "RNG seed");
  exp->add_option("--jobs", common.jobs, "Worker thread count (0 = default)");
  exp->add_option("--out", ex_out, "Output file prefix");

  // report
  auto* rep = app.add_subcommand("report", "Rebuild tables from a stored sweep CSV");
  std::string re_input, re_out;
  rep->add_option("--input", re_input, "Sweep CSV from the experiment command")
      ->required();
  rep->add_option("--out", re_out, "Output file prefix (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (common.jobs > 0) omp_set_num_threads(common.jobs);

  try {
    if (synth->parsed()) {
      return run_synth(sy_n, sy_p, sy_cens, sy_shape, sy_scale, sy_groups,
                       common.seed, sy_out);
    }
    if (audit->parsed()) {
      return run_audit(common, au_input, au_train_frac, au_out);
    }
    if (exp->parsed()) {
      return run_experiment(common, ex_inputs, ex_synth, ex_synth_n, ex_synth_p,
                            ex_synth_cens, ex_method, ex_grid, ex_reps, ex_folds,
                            ex_out);
    }
    if (rep->parsed()) {
      return run_report(re_input, re_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
