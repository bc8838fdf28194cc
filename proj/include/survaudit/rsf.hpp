#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "survaudit/dataset.hpp"
#include "survaudit/metrics.hpp"

namespace survaudit {

struct RSFParams {
  int tree_count = 100;
  int mtry = 0;  // 0 = ceil(sqrt(p))
  int min_node_size = 3;
  std::optional<int> max_depth;
  std::uint64_t seed = 0;
};

// Flat node array per tree; leaves reference a row of leaf_cumhaz, which holds
// the Nelson-Aalen estimate of the in-bag leaf members over the shared grid.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf = -1;  // index into leaf_cumhaz rows, -1 for internal nodes
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_cumhaz;       // leaf_count * grid_size, row-major
  std::vector<std::uint32_t> inbag;      // bootstrap multiplicity per train row
};

struct RSFModel {
  std::size_t n_features = 0;
  std::vector<double> time_grid;  // sorted unique training event times
  std::vector<Tree> trees;

  const double* leaf_for(const Tree& tree, const double* row) const;
};

// Bootstrap + log-rank splitting; trees are fit in parallel with per-tree
// seeds derived from params.seed, so results do not depend on thread count.
RSFModel fit_rsf(const SurvivalDataset& train, const RSFParams& params);

// Serial reference: same algorithm without the OpenMP loop.
RSFModel fit_rsf_serial(const SurvivalDataset& train, const RSFParams& params);

// Ensemble cumulative hazard = mean of leaf hazards; survival = exp(-H).
DistributionPrediction predict_distribution(const RSFModel& model,
                                            const std::vector<double>& features,
                                            std::size_t n_rows);
DistributionPrediction predict_distribution(const RSFModel& model,
                                            const SurvivalDataset& ds);

// Ensemble mortality: sum of the ensemble cumulative hazard over the grid.
RiskPrediction predict_risk(const RSFModel& model, const std::vector<double>& features,
                            std::size_t n_rows);
RiskPrediction predict_risk(const RSFModel& model, const SurvivalDataset& ds);

void save_model(const RSFModel& model, const std::string& path);
RSFModel load_model(const std::string& path);

}  // namespace survaudit
