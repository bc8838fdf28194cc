#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "survaudit/km.hpp"

namespace survaudit {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-observation survival curves on a shared time grid. Each row is a
// right-continuous step function; S = 1 before the first grid point.
struct DistributionPrediction {
  std::vector<double> time_grid;  // sorted, positive
  std::size_t n_rows = 0;
  std::vector<double> survival;  // row-major, n_rows * time_grid.size()

  double surv_at(std::size_t row, double t) const;
  double cumhaz_at(std::size_t row, double t) const;
  // Piecewise-constant interval density: the drop at grid point j is spread
  // over [g_j, g_{j+1}); zero beyond the last grid point.
  double density_at(std::size_t row, double t) const;

  DistributionPrediction take_rows(const std::vector<std::size_t>& rows) const;
};

// Re-express the curves on a new grid by right-continuous evaluation.
DistributionPrediction regrid(const DistributionPrediction& pred,
                              std::vector<double> new_grid);

// One curve replicated over n rows (the Kaplan-Meier baseline prediction).
DistributionPrediction broadcast_curve(const SurvivalCurve& curve, std::size_t n_rows);

struct RiskPrediction {
  std::vector<double> risk;  // higher = more at risk
};

// IPCW weights 1 / G(t-), with G floored before inversion.
struct CensoringWeights {
  SurvivalCurve curve;
  double floor = 1e-3;

  double weight_at(double t) const {
    const double g = curve.eval_survival(t, Side::Left);
    return 1.0 / std::max(g, floor);
  }
};

struct MetricValue {
  std::string name;
  double value = 0.0;
  std::size_t n_effective = 0;
};

inline constexpr double kProbFloor = 1e-15;

MetricValue rsbs(const DistributionPrediction& pred, std::span<const double> time,
                 std::span<const int> status, const CensoringWeights& G);
MetricValue risl(const DistributionPrediction& pred, std::span<const double> time,
                 std::span<const int> status, const CensoringWeights& G);
MetricValue snl(const DistributionPrediction& pred, std::span<const double> time,
                std::span<const int> status, const CensoringWeights& G);
MetricValue rcll(const DistributionPrediction& pred, std::span<const double> time,
                 std::span<const int> status);
MetricValue harrell_c(const RiskPrediction& risk, std::span<const double> time,
                      std::span<const int> status);
MetricValue uno_c(const RiskPrediction& risk, std::span<const double> time,
                  std::span<const int> status, const CensoringWeights& G, double tau);
MetricValue cal_alpha(const DistributionPrediction& pred, std::span<const double> time,
                      std::span<const int> status);
MetricValue cal_d(const DistributionPrediction& pred, std::span<const double> time,
                  std::span<const int> status, int bins = 10);

// Explained residual variation: percentage decrease of the model loss
// relative to the Kaplan-Meier baseline loss.
double erv(double model_loss, double baseline_loss);

enum class Measure { Rsbs, Risl, Snl, Rcll, Charrell, Cuno, Cala, Cald };

inline constexpr Measure kAllMeasures[] = {
    Measure::Rsbs, Measure::Risl, Measure::Snl,  Measure::Rcll,
    Measure::Charrell, Measure::Cuno, Measure::Cala, Measure::Cald};

std::string measure_name(Measure m);
Measure parse_measure(const std::string& name);  // case-insensitive
bool is_scoring_rule(Measure m);  // rsbs/risl/snl/rcll are ERV-standardized

}  // namespace survaudit
