#include "survaudit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace survaudit {

namespace {

std::ptrdiff_t grid_index(const std::vector<double>& grid, double t) {
  return std::upper_bound(grid.begin(), grid.end(), t) - grid.begin() - 1;
}

void check_lengths(const DistributionPrediction& pred, std::span<const double> time,
                   std::span<const int> status) {
  if (pred.n_rows != time.size() || time.size() != status.size()) {
    throw MetricError("prediction/time/status lengths disagree");
  }
  if (time.empty()) throw MetricError("empty input");
}

double floored_log(double p) { return std::log(std::max(p, kProbFloor)); }

}  // namespace

double DistributionPrediction::surv_at(std::size_t row, double t) const {
  const auto j = grid_index(time_grid, t);
  return j < 0 ? 1.0 : survival[row * time_grid.size() + static_cast<std::size_t>(j)];
}

double DistributionPrediction::cumhaz_at(std::size_t row, double t) const {
  return -floored_log(surv_at(row, t));
}

double DistributionPrediction::density_at(std::size_t row, double t) const {
  const auto j = grid_index(time_grid, t);
  const auto m = static_cast<std::ptrdiff_t>(time_grid.size());
  if (j < 0 || j + 1 >= m) return 0.0;
  const std::size_t k = static_cast<std::size_t>(j);
  const double prev = k == 0 ? 1.0 : survival[row * time_grid.size() + k - 1];
  const double cur = survival[row * time_grid.size() + k];
  const double width = time_grid[k + 1] - time_grid[k];
  return (prev - cur) / width;
}

DistributionPrediction DistributionPrediction::take_rows(
    const std::vector<std::size_t>& rows) const {
  DistributionPrediction out;
  out.time_grid = time_grid;
  out.n_rows = rows.size();
  const std::size_t m = time_grid.size();
  out.survival.reserve(rows.size() * m);
  for (std::size_t r : rows) {
    out.survival.insert(out.survival.end(), survival.begin() + r * m,
                        survival.begin() + (r + 1) * m);
  }
  return out;
}

DistributionPrediction regrid(const DistributionPrediction& pred,
                              std::vector<double> new_grid) {
  DistributionPrediction out;
  out.n_rows = pred.n_rows;
  out.time_grid = std::move(new_grid);
  const std::size_t m = out.time_grid.size();
  out.survival.resize(pred.n_rows * m);
  for (std::size_t i = 0; i < pred.n_rows; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      out.survival[i * m + j] = pred.surv_at(i, out.time_grid[j]);
    }
  }
  return out;
}

DistributionPrediction broadcast_curve(const SurvivalCurve& curve, std::size_t n_rows) {
  DistributionPrediction out;
  out.time_grid = curve.times;
  out.n_rows = n_rows;
  const std::size_t m = curve.times.size();
  out.survival.resize(n_rows * m);
  for (std::size_t i = 0; i < n_rows; ++i) {
    std::copy(curve.survival.begin(), curve.survival.end(),
              out.survival.begin() + i * m);
  }
  return out;
}

MetricValue rsbs(const DistributionPrediction& pred, std::span<const double> time,
                 std::span<const int> status, const CensoringWeights& G) {
  check_lengths(pred, time, status);
  const auto& grid = pred.time_grid;
  if (grid.empty()) throw MetricError("rsbs: empty time grid");
  std::size_t n_eff = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (status[i] == 0) continue;
    ++n_eff;
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      const double f = 1.0 - pred.survival[i * grid.size() + j];
      const double ind = time[i] <= grid[j] ? 1.0 : 0.0;
      integral += (ind - f) * (ind - f) * (grid[j + 1] - grid[j]);
    }
    total += integral * G.weight_at(time[i]);
  }
  if (n_eff == 0) throw MetricError("rsbs: all observations censored");
  return {"rsbs", total / static_cast<double>(time.size()), n_eff};
}

MetricValue risl(const DistributionPrediction& pred, std::span<const double> time,
                 std::span<const int> status, const CensoringWeights& G) {
  check_lengths(pred, time, status);
  const auto& grid = pred.time_grid;
  if (grid.empty()) throw MetricError("risl: empty time grid");
  std::size_t n_eff = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (status[i] == 0) continue;
    ++n_eff;
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
      const double s = pred.survival[i * grid.size() + j];
      const double term = time[i] <= grid[j] ? floored_log(1.0 - s) : floored_log(s);
      integral += term * (grid[j + 1] - grid[j]);
    }
    total += -integral * G.weight_at(time[i]);
  }
  if (n_eff == 0) throw MetricError("risl: all observations censored");
  return {"risl", total / static_cast<double>(time.size()), n_eff};
}

MetricValue snl(const DistributionPrediction& pred, std::span<const double> time,
                std::span<const int> status, const CensoringWeights& G) {
  check_lengths(pred, time, status);
  if (pred.time_grid.empty()) throw MetricError("snl: empty time grid");
  std::size_t n_eff = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (status[i] == 0) continue;
    ++n_eff;
    total += -floored_log(pred.density_at(i, time[i])) * G.weight_at(time[i]);
  }
  if (n_eff == 0) throw MetricError("snl: all observations censored");
  return {"snl", total / static_cast<double>(time.size()), n_eff};
}

MetricValue rcll(const DistributionPrediction& pred, std::span<const double> time,
                 std::span<const int> status) {
  check_lengths(pred, time, status);
  double total = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    const double v = status[i] == 1 ? pred.density_at(i, time[i])
                                    : pred.surv_at(i, time[i]);
    total += -floored_log(v);
  }
  return {"rcll", total / static_cast<double>(time.size()), time.size()};
}

MetricValue harrell_c(const RiskPrediction& risk, std::span<const double> time,
                      std::span<const int> status) {
  if (risk.risk.size() != time.size() || time.size() != status.size()) {
    throw MetricError("harrell_c: lengths disagree");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (status[i] == 0) continue;
    for (std::size_t j = 0; j < time.size(); ++j) {
      if (i == j || !(time[i] < time[j])) continue;
      den += 1.0;
      if (risk.risk[i] > risk.risk[j]) {
        num += 1.0;
      } else if (risk.risk[i] == risk.risk[j]) {
        num += 0.5;
      }
    }
  }
  if (den == 0.0) throw MetricError("harrell_c: no comparable pairs");
  return {"charrell", num / den, time.size()};
}

MetricValue uno_c(const RiskPrediction& risk, std::span<const double> time,
                  std::span<const int> status, const CensoringWeights& G, double tau) {
  if (risk.risk.size() != time.size() || time.size() != status.size()) {
    throw MetricError("uno_c: lengths disagree");
  }
  if (!(tau > 0.0)) throw MetricError("uno_c: tau must be positive");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (status[i] == 0 || !(time[i] < tau)) continue;
    const double wi = G.weight_at(time[i]);
    const double w = wi * wi;
    for (std::size_t j = 0; j < time.size(); ++j) {
      if (i == j || !(time[i] < time[j])) continue;
      den += w;
      if (risk.risk[i] > risk.risk[j]) {
        num += w;
      } else if (risk.risk[i] == risk.risk[j]) {
        num += 0.5 * w;
      }
    }
  }
  if (den == 0.0) throw MetricError("uno_c: no weighted comparable pairs");
  return {"cuno", num / den, time.size()};
}

MetricValue cal_alpha(const DistributionPrediction& pred, std::span<const double> time,
                      std::span<const int> status) {
  check_lengths(pred, time, status);
  double events = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    events += status[i];
    expected += pred.cumhaz_at(i, time[i]);
  }
  if (expected <= 0.0) throw MetricError("cal_alpha: zero predicted hazard");
  return {"cala", events / expected, time.size()};
}

MetricValue cal_d(const DistributionPrediction& pred, std::span<const double> time,
                  std::span<const int> status, int bins) {
  check_lengths(pred, time, status);
  if (bins < 2) throw MetricError("cal_d: bins must be >= 2");
  const std::size_t n = time.size();
  if (n < static_cast<std::size_t>(bins)) throw MetricError("cal_d: n < bins");
  std::vector<double> counts(bins, 0.0);
  const double width = 1.0 / bins;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = pred.surv_at(i, time[i]);
    if (status[i] == 1) {
      const int b = std::min(static_cast<int>(s / width), bins - 1);
      counts[b] += 1.0;
    } else if (s <= 0.0) {
      counts[0] += 1.0;
    } else {
      // Censored: spread mass uniformly over [0, s].
      for (int b = 0; b < bins; ++b) {
        const double lo = b * width;
        const double hi = (b + 1) * width;
        const double overlap = std::max(0.0, std::min(s, hi) - lo);
        if (overlap > 0.0) counts[b] += overlap / s;
      }
    }
  }
  const double expected = static_cast<double>(n) / bins;
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  return {"cald", stat, n};
}

double erv(double model_loss, double baseline_loss) {
  if (baseline_loss == 0.0) throw MetricError("erv: zero baseline loss");
  return 1.0 - model_loss / baseline_loss;
}

std::string measure_name(Measure m) {
  switch (m) {
    case Measure::Rsbs: return "rsbs";
    case Measure::Risl: return "risl";
    case Measure::Snl: return "snl";
    case Measure::Rcll: return "rcll";
    case Measure::Charrell: return "charrell";
    case Measure::Cuno: return "cuno";
    case Measure::Cala: return "cala";
    case Measure::Cald: return "cald";
  }
  throw MetricError("unknown measure");
}

Measure parse_measure(const std::string& name) {
  std::string low;
  for (char c : name) low.push_back(static_cast<char>(std::tolower(c)));
  for (Measure m : kAllMeasures) {
    if (measure_name(m) == low) return m;
  }
  throw MetricError("unknown measure name: '" + name + "'");
}

bool is_scoring_rule(Measure m) {
  return m == Measure::Rsbs || m == Measure::Risl || m == Measure::Snl ||
         m == Measure::Rcll;
}

}  // namespace survaudit
