#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "survaudit/biasing.hpp"

namespace survaudit {

struct SweepRow {
  std::string dataset;
  BiasMethod method = BiasMethod::Permutation;
  Measure measure = Measure::Rsbs;
  double sigma = 0.0;
  double fl_mean = 0.0;
  double fl_sd = 0.0;
  int repetitions = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::pair<std::string, std::string>> failures;  // dataset id, error
};

struct NamedDataset {
  std::string id;
  SurvivalDataset data;
};

// One bias run per (dataset, sigma); cells run in parallel but the output is
// identical to sequential execution. Failing datasets are recorded in
// `failures`, the remaining rows are still produced.
SweepResult sigma_sweep(const std::vector<NamedDataset>& datasets,
                        const std::vector<double>& grid,
                        const std::vector<Measure>& measures, BiasMethod method,
                        const RSFParams& learner_params, const BiasRunConfig& config);

// Spearman rank correlation on mid-ranks with the t-approximation p-value.
std::pair<double, double> spearman_rho(std::span<const double> x,
                                       std::span<const double> y);

struct OlsResult {
  double alpha = 0.0;
  double beta = 0.0;
  double p = 1.0;
};

OlsResult ols_slope_test(std::span<const double> x, std::span<const double> y);

std::vector<double> holm_correct(const std::vector<double>& p_values);

struct StatsRow {
  Measure measure = Measure::Rsbs;
  BiasMethod method = BiasMethod::Permutation;
  double alpha = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  double p_beta = 1.0;
  double p_rho = 1.0;
  double p_beta_adj = 1.0;
  double p_rho_adj = 1.0;
  bool significant_beta = false;
  bool significant_rho = false;
  bool rho_defined = true;
  bool slope_negligible = false;  // significant but beta < 0.02
};

struct Report {
  std::vector<StatsRow> stats;
  // (method, measure) -> per-sigma grand means, keyed by sigma.
  std::map<std::pair<BiasMethod, Measure>, std::map<double, double>> sigma_means;

  std::string render_text() const;
  std::string render_stats_csv() const;
};

// Regression pools per-dataset means over all sigma levels; Spearman uses the
// per-sigma grand means. Holm correction is applied per (method, test family).
Report build_report(const SweepResult& sweep);

void write_sweep_csv(const SweepResult& sweep, const std::string& path);
SweepResult read_sweep_csv(const std::string& path);

}  // namespace survaudit
