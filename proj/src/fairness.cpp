#include "survaudit/fairness.hpp"

#include <algorithm>
#include <cmath>

namespace survaudit {

double fairness_gap(double loss_a, double loss_b) {
  if (!std::isfinite(loss_a) || !std::isfinite(loss_b)) {
    throw MetricError("fairness_gap: non-finite loss");
  }
  return std::abs(loss_a - loss_b);
}

namespace {

std::vector<double> unique_times(std::span<const double> time) {
  std::vector<double> grid(time.begin(), time.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double max_event_time(std::span<const double> time, std::span<const int> status) {
  double tau = 0.0;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (status[i] == 1) tau = std::max(tau, time[i]);
  }
  if (tau <= 0.0) throw MetricError("no events in evaluation set");
  return tau;
}

}  // namespace

double evaluate_measure(Measure m, const DistributionPrediction& pred,
                        const RiskPrediction& risk, std::span<const double> time,
                        std::span<const int> status, const CensoringWeights& G,
                        const DistributionPrediction& baseline) {
  switch (m) {
    case Measure::Rsbs: {
      const auto grid = unique_times(time);
      const double lm = rsbs(regrid(pred, grid), time, status, G).value;
      const double lk = rsbs(regrid(baseline, grid), time, status, G).value;
      return erv(lm, lk);
    }
    case Measure::Risl: {
      const auto grid = unique_times(time);
      const double lm = risl(regrid(pred, grid), time, status, G).value;
      const double lk = risl(regrid(baseline, grid), time, status, G).value;
      return erv(lm, lk);
    }
    case Measure::Snl:
      return erv(snl(pred, time, status, G).value,
                 snl(baseline, time, status, G).value);
    case Measure::Rcll:
      return erv(rcll(pred, time, status).value, rcll(baseline, time, status).value);
    case Measure::Charrell:
      return harrell_c(risk, time, status).value;
    case Measure::Cuno:
      return uno_c(risk, time, status, G, max_event_time(time, status)).value;
    case Measure::Cala:
      return cal_alpha(pred, time, status).value;
    case Measure::Cald:
      return cal_d(pred, time, status).value;
  }
  throw MetricError("unknown measure");
}

std::vector<FairnessResult> audit_groups(const DistributionPrediction& pred_dist,
                                         const RiskPrediction& pred_risk,
                                         const SurvivalDataset& test,
                                         const std::vector<Measure>& measures,
                                         const CensoringWeights& G,
                                         const DistributionPrediction& baseline) {
  if (measures.empty()) throw MetricError("no measures requested");
  const auto labels = group_labels(test);
  if (labels.size() != 2) {
    throw DataError("audit requires exactly two group labels, found " +
                    std::to_string(labels.size()));
  }
  std::vector<std::vector<std::size_t>> rows(2);
  for (std::size_t i = 0; i < test.n_rows; ++i) {
    rows[(*test.group)[i] == labels[0] ? 0 : 1].push_back(i);
  }

  struct GroupView {
    DistributionPrediction pred;
    RiskPrediction risk;
    std::vector<double> time;
    std::vector<int> status;
    DistributionPrediction baseline;
  };
  std::vector<GroupView> views(2);
  for (int g = 0; g < 2; ++g) {
    views[g].pred = pred_dist.take_rows(rows[g]);
    views[g].baseline = baseline.take_rows(rows[g]);
    for (std::size_t r : rows[g]) {
      views[g].risk.risk.push_back(pred_risk.risk[r]);
      views[g].time.push_back(test.time[r]);
      views[g].status.push_back(test.status[r]);
    }
  }

  std::vector<FairnessResult> out;
  for (Measure m : measures) {
    FairnessResult res;
    res.measure = m;
    res.n_advantaged = rows[0].size();
    res.n_disadvantaged = rows[1].size();
    try {
      res.loss_advantaged =
          evaluate_measure(m, views[0].pred, views[0].risk, views[0].time,
                           views[0].status, G, views[0].baseline);
      res.loss_disadvantaged =
          evaluate_measure(m, views[1].pred, views[1].risk, views[1].time,
                           views[1].status, G, views[1].baseline);
      res.gap = fairness_gap(res.loss_advantaged, res.loss_disadvantaged);
    } catch (const std::exception& e) {
      res.error = e.what();
    }
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace survaudit
