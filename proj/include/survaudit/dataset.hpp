#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace survaudit {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Right-censored survival data: covariates X, observed times T, event
// indicators (1 = event, 0 = censored) and an optional sensitive-group label.
// Immutable after construction; all randomized operations take explicit seeds.
struct SurvivalDataset {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<double> features;  // row-major, n_rows * n_features
  std::vector<double> time;
  std::vector<int> status;
  std::optional<std::vector<std::string>> group;
  std::vector<std::int64_t> ids;

  double feature(std::size_t row, std::size_t col) const {
    return features[row * n_features + col];
  }

  std::size_t event_count() const;
  SurvivalDataset take_rows(const std::vector<std::size_t>& rows) const;
  void validate() const;  // throws DataError on any invariant violation
};

struct CsvSchema {
  std::string time_col = "time";
  std::string status_col = "status";
  std::string group_col = "group";  // used only when present in the header
};

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema = {});
void save_csv(const SurvivalDataset& ds, const std::string& path,
              const CsvSchema& schema = {});

struct SynthConfig {
  std::size_t n = 600;
  std::size_t p = 5;
  std::vector<double> effect_weights;  // empty = alternating +/-1
  double baseline_shape = 1.5;
  double baseline_scale = 10.0;
  double target_censoring = 0.3;
  std::size_t group_count = 1;
};

// Weibull event times with the scale modulated by exp(x . w); independent
// exponential censoring, rate tuned by bisection to the target fraction.
SurvivalDataset generate_synthetic(const SynthConfig& config, std::uint64_t seed);

std::pair<SurvivalDataset, SurvivalDataset> split_random(
    const SurvivalDataset& ds, double fraction, std::uint64_t seed);

// First part receives exactly `count` rows, chosen uniformly.
std::pair<SurvivalDataset, SurvivalDataset> split_count(
    const SurvivalDataset& ds, std::size_t count, std::uint64_t seed);

SurvivalDataset concat(const SurvivalDataset& a, const SurvivalDataset& b);

struct FoldAssignment {
  std::vector<int> fold_index;  // n entries in [0, k)
  int k = 0;
};

FoldAssignment kfold_partition(const SurvivalDataset& ds, int k, std::uint64_t seed);

SurvivalDataset subset_by_group(const SurvivalDataset& ds, const std::string& label);

std::vector<std::string> group_labels(const SurvivalDataset& ds);  // sorted unique

}  // namespace survaudit
