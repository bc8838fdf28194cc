#pragma once

#include <optional>
#include <vector>

#include "survaudit/dataset.hpp"
#include "survaudit/metrics.hpp"

namespace survaudit {

struct FairnessResult {
  Measure measure;
  double loss_advantaged = 0.0;
  double loss_disadvantaged = 0.0;
  double gap = 0.0;
  std::size_t n_advantaged = 0;
  std::size_t n_disadvantaged = 0;
  std::optional<std::string> error;  // set when one group failed this measure
};

double fairness_gap(double loss_a, double loss_b);

// One measure on one evaluation set. Scoring rules are ERV-standardized
// against the baseline; rsbs/risl are integrated over the sorted unique
// observed times of the evaluation set.
double evaluate_measure(Measure m, const DistributionPrediction& pred,
                        const RiskPrediction& risk, std::span<const double> time,
                        std::span<const int> status, const CensoringWeights& G,
                        const DistributionPrediction& baseline);

// Per-group losses and gap for each requested measure. The test set must have
// exactly two group labels; the lexicographically first label is reported as
// the advantaged group. A measure failing on one group is returned with its
// error set; the remaining measures are unaffected.
std::vector<FairnessResult> audit_groups(const DistributionPrediction& pred_dist,
                                         const RiskPrediction& pred_risk,
                                         const SurvivalDataset& test,
                                         const std::vector<Measure>& measures,
                                         const CensoringWeights& G,
                                         const DistributionPrediction& baseline);

}  // namespace survaudit
