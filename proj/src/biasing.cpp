#include "survaudit/biasing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survaudit/fairness.hpp"
#include "survaudit/km.hpp"
#include "survaudit/rng.hpp"

namespace survaudit {

std::string bias_method_name(BiasMethod m) {
  return m == BiasMethod::Permutation ? "permutation" : "undersampling";
}

BiasMethod parse_bias_method(const std::string& name) {
  if (name == "permutation") return BiasMethod::Permutation;
  if (name == "undersampling") return BiasMethod::Undersampling;
  throw DataError("unknown biasing method: '" + name + "'");
}

SurvivalDataset apply_permutation(const SurvivalDataset& ds, std::uint64_t seed) {
  if (ds.n_rows < 2) throw DataError("permutation requires n >= 2");
  std::vector<std::size_t> perm(ds.n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x9e23}));
  rng.shuffle(perm);
  SurvivalDataset out = ds;
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    for (std::size_t j = 0; j < ds.n_features; ++j) {
      out.features[i * ds.n_features + j] = ds.feature(perm[i], j);
    }
  }
  return out;
}

SurvivalDataset apply_undersampling(const SurvivalDataset& ds) {
  SurvivalDataset out;
  out.n_features = ds.n_features;
  out.group = ds.group ? std::optional<std::vector<std::string>>(
                             std::vector<std::string>{})
                       : std::nullopt;
  return out;
}

double BiasRunResult::mean(Measure m) const {
  const auto& v = per_repetition.at(m);
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double BiasRunResult::sd(Measure m) const {
  const auto& v = per_repetition.at(m);
  if (v.size() < 2) return 0.0;
  const double mu = mean(m);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

struct DegenerateFold : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mean cross-validated loss per measure; a fresh RSF per fold, scoring rules
// ERV-standardized within each fold against a KM fit on the training part.
std::map<Measure, double> cv_losses(const SurvivalDataset& ds, int folds,
                                    const std::vector<Measure>& measures,
                                    const RSFParams& learner_params,
                                    std::uint64_t seed) {
  if (ds.n_rows < static_cast<std::size_t>(2 * folds)) {
    throw DegenerateFold("dataset too small for " + std::to_string(folds) +
                         "-fold CV");
  }
  const FoldAssignment fa = kfold_partition(ds, folds, derive_seed(seed, {0xcf}));
  std::map<Measure, double> total;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
      (fa.fold_index[i] == f ? test_rows : train_rows).push_back(i);
    }
    const SurvivalDataset train = ds.take_rows(train_rows);
    const SurvivalDataset test = ds.take_rows(test_rows);
    if (train.event_count() == 0 || test.event_count() == 0) {
      throw DegenerateFold("fold without events");
    }
    RSFParams params = learner_params;
    params.seed = derive_seed(seed, {0x4e57, static_cast<std::uint64_t>(f)});
    const RSFModel model = fit_rsf(train, params);
    const DistributionPrediction pred = predict_distribution(model, test);
    const RiskPrediction risk = predict_risk(model, test);
    const CensoringWeights G{fit_censoring_km(test.time, test.status)};
    const DistributionPrediction baseline =
        broadcast_curve(fit_km(train.time, train.status), test.n_rows);
    for (Measure m : measures) {
      try {
        total[m] += evaluate_measure(m, pred, risk, test.time, test.status, G,
                                     baseline);
      } catch (const MetricError& e) {
        throw DegenerateFold(std::string("fold evaluation failed: ") + e.what());
      }
    }
  }
  for (auto& [m, v] : total) v /= static_cast<double>(folds);
  return total;
}

}  // namespace

BiasRunResult run_bias_algorithm(const SurvivalDataset& data, double sigma,
                                 const std::vector<Measure>& measures,
                                 const RSFParams& learner_params, BiasMethod method,
                                 const BiasRunConfig& config) {
  if (sigma < 0.0 || sigma >= 1.0) throw DataError("sigma must be in [0,1)");
  if (config.repetitions < 1) throw DataError("repetitions must be >= 1");
  if (config.folds < 2) throw DataError("folds must be >= 2");
  if (data.n_rows < static_cast<std::size_t>(4 * config.folds)) {
    throw DataError("dataset too small for the bias experiment");
  }

  BiasRunResult result;
  for (Measure m : measures) result.per_repetition[m] = {};

  constexpr int kMaxRedraws = 5;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    int attempt = 0;
    for (;; ++attempt) {
      const std::uint64_t rep_seed =
          derive_seed(config.seed, {static_cast<std::uint64_t>(rep),
                                    static_cast<std::uint64_t>(attempt)});
      try {
        auto [biased_half, untouched_half] =
            split_count(data, data.n_rows / 2, derive_seed(rep_seed, {1}));

        const auto n_biased = static_cast<std::size_t>(std::llround(
            sigma * static_cast<double>(biased_half.n_rows)));
        auto [keep, to_bias] = split_count(
            biased_half, biased_half.n_rows - n_biased, derive_seed(rep_seed, {2}));
        if (method == BiasMethod::Permutation) {
          if (to_bias.n_rows >= 2) {
            to_bias = apply_permutation(to_bias, derive_seed(rep_seed, {3}));
          }
        } else {
          to_bias = apply_undersampling(to_bias);
        }
        const SurvivalDataset recombined = concat(keep, to_bias);

        const auto loss_biased = cv_losses(recombined, config.folds, measures,
                                           learner_params,
                                           derive_seed(rep_seed, {4, 0}));
        const auto loss_untouched = cv_losses(untouched_half, config.folds, measures,
                                              learner_params,
                                              derive_seed(rep_seed, {4, 1}));
        for (Measure m : measures) {
          result.per_repetition[m].push_back(
              fairness_gap(loss_biased.at(m), loss_untouched.at(m)));
        }
        break;
      } catch (const DegenerateFold& e) {
        if (attempt >= kMaxRedraws) {
          throw DataError("bias experiment repetition " + std::to_string(rep + 1) +
                          " failed after " + std::to_string(kMaxRedraws + 1) +
                          " draws: " + e.what());
        }
      }
    }
  }
  return result;
}

}  // namespace survaudit
