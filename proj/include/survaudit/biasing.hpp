#pragma once

#include <map>
#include <vector>

#include "survaudit/dataset.hpp"
#include "survaudit/metrics.hpp"
#include "survaudit/rsf.hpp"

namespace survaudit {

enum class BiasMethod { Permutation, Undersampling };

std::string bias_method_name(BiasMethod m);
BiasMethod parse_bias_method(const std::string& name);

struct BiasRunConfig {
  int repetitions = 10;
  int folds = 3;
  std::uint64_t seed = 0;
};

// Measurement bias: uniformly permute the covariate rows while (time, status)
// stay in place, breaking the covariate-outcome link.
SurvivalDataset apply_permutation(const SurvivalDataset& ds, std::uint64_t seed);

// Representation bias: delete every row.
SurvivalDataset apply_undersampling(const SurvivalDataset& ds);

struct BiasRunResult {
  std::map<Measure, std::vector<double>> per_repetition;  // F_L per repetition

  double mean(Measure m) const;
  double sd(Measure m) const;
};

// Generic bias-injection experiment: split into a to-be-biased half and an
// untouched half, bias a sigma-fraction of the first, score both halves by
// k-fold cross-validated RSF, and average |L_B - L_U| over repetitions.
BiasRunResult run_bias_algorithm(const SurvivalDataset& data, double sigma,
                                 const std::vector<Measure>& measures,
                                 const RSFParams& learner_params, BiasMethod method,
                                 const BiasRunConfig& config);

}  // namespace survaudit
