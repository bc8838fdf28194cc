#include "survaudit/rsf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "survaudit/rng.hpp"

namespace survaudit {

namespace {

struct TreeBuilder {
  const SurvivalDataset& data;
  const RSFParams& params;
  const std::vector<double>& grid;
  int mtry;
  Rng rng;
  Tree tree;

  // Scratch reused across nodes.
  std::vector<double> node_event_times;
  std::vector<double> d_total, risk_total, d_left, at_left;

  TreeBuilder(const SurvivalDataset& ds, const RSFParams& p,
              const std::vector<double>& g, int mtry_in, std::uint64_t seed)
      : data(ds), params(p), grid(g), mtry(mtry_in), rng(seed) {}

  void build() {
    const std::size_t n = data.n_rows;
    tree.inbag.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) tree.inbag[rng.below(n)]++;
    std::vector<std::uint32_t> members;
    members.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint32_t c = 0; c < tree.inbag[i]; ++c) {
        members.push_back(static_cast<std::uint32_t>(i));
      }
    }
    build_node(members, 0);
  }

  int build_node(std::vector<std::uint32_t>& members, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    node_event_times.clear();
    for (std::uint32_t m : members) {
      if (data.status[m] == 1) node_event_times.push_back(data.time[m]);
    }
    std::sort(node_event_times.begin(), node_event_times.end());
    node_event_times.erase(
        std::unique(node_event_times.begin(), node_event_times.end()),
        node_event_times.end());

    const bool can_split =
        node_event_times.size() >= 2 &&
        members.size() >= 2 * static_cast<std::size_t>(params.min_node_size) &&
        (!params.max_depth || depth < *params.max_depth);

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_stat = 0.0;
    if (can_split && find_best_split(members, best_feature, best_threshold, best_stat)) {
      std::vector<std::uint32_t> left, right;
      for (std::uint32_t m : members) {
        const double v = data.feature(m, static_cast<std::size_t>(best_feature));
        (v <= best_threshold ? left : right).push_back(m);
      }
      members.clear();
      members.shrink_to_fit();
      tree.nodes[node_id].feature = best_feature;
      tree.nodes[node_id].threshold = best_threshold;
      const int l = build_node(left, depth + 1);
      const int r = build_node(right, depth + 1);
      tree.nodes[node_id].left = l;
      tree.nodes[node_id].right = r;
      return node_id;
    }

    tree.nodes[node_id].leaf = make_leaf(members);
    return node_id;
  }

  // Log-rank statistic maximized over (feature, threshold) candidates in
  // ascending (feature index, threshold) order; strict improvement keeps the
  // first maximal split.
  bool find_best_split(const std::vector<std::uint32_t>& members, int& best_feature,
                       double& best_threshold, double& best_stat) {
    const std::size_t m = members.size();
    const std::size_t n_et = node_event_times.size();

    // Per-member index of the last node event time <= T (or -1).
    std::vector<int> ub(m);
    d_total.assign(n_et, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::uint32_t r = members[i];
      const auto it = std::upper_bound(node_event_times.begin(),
                                       node_event_times.end(), data.time[r]);
      ub[i] = static_cast<int>(it - node_event_times.begin()) - 1;
      if (data.status[r] == 1) d_total[static_cast<std::size_t>(ub[i])] += 1.0;
    }
    risk_total.assign(n_et, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (ub[i] >= 0) risk_total[static_cast<std::size_t>(ub[i])] += 1.0;
    }
    for (std::size_t k = n_et - 1; k > 0; --k) risk_total[k - 1] += risk_total[k];

    std::vector<int> feats(data.n_features);
    std::iota(feats.begin(), feats.end(), 0);
    for (int j = 0; j < mtry; ++j) {
      const auto pick = j + static_cast<int>(rng.below(data.n_features - j));
      std::swap(feats[j], feats[pick]);
    }
    feats.resize(mtry);
    std::sort(feats.begin(), feats.end());

    std::vector<std::pair<double, std::size_t>> order(m);
    bool found = false;
    best_stat = -std::numeric_limits<double>::infinity();
    const auto min_size = static_cast<std::size_t>(params.min_node_size);

    for (int f : feats) {
      for (std::size_t i = 0; i < m; ++i) {
        order[i] = {data.feature(members[i], static_cast<std::size_t>(f)), i};
      }
      std::sort(order.begin(), order.end());
      if (order.front().first == order.back().first) continue;

      d_left.assign(n_et, 0.0);
      at_left.assign(n_et, 0.0);
      std::size_t pos = 0;
      while (pos < m) {
        const double value = order[pos].first;
        while (pos < m && order[pos].first == value) {
          const std::size_t i = order[pos].second;
          if (ub[i] >= 0) {
            const auto k = static_cast<std::size_t>(ub[i]);
            at_left[k] += 1.0;
            if (data.status[members[i]] == 1) d_left[k] += 1.0;
          }
          ++pos;
        }
        if (pos >= m) break;  // all remaining values equal: no boundary
        const std::size_t n_left = pos;
        if (n_left < min_size || m - n_left < min_size) continue;

        double num = 0.0, var = 0.0, suffix = 0.0;
        for (std::size_t k = n_et; k-- > 0;) {
          suffix += at_left[k];
          const double nk = risk_total[k];
          const double dk = d_total[k];
          num += d_left[k] - suffix * dk / nk;
          if (nk > 1.0) {
            const double frac = suffix / nk;
            var += dk * frac * (1.0 - frac) * (nk - dk) / (nk - 1.0);
          }
        }
        if (var <= 0.0) continue;
        const double stat = num * num / var;
        if (stat > best_stat) {
          best_stat = stat;
          best_feature = f;
          best_threshold = 0.5 * (value + order[pos].first);
          found = true;
        }
      }
    }
    return found;
  }

  int make_leaf(const std::vector<std::uint32_t>& members) {
    // Nelson-Aalen over the leaf members, evaluated on the shared grid.
    std::vector<std::pair<double, int>> obs;
    obs.reserve(members.size());
    for (std::uint32_t r : members) obs.emplace_back(data.time[r], data.status[r]);
    std::sort(obs.begin(), obs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    const int leaf_id = static_cast<int>(tree.leaf_cumhaz.size() / grid.size());
    tree.leaf_cumhaz.resize(tree.leaf_cumhaz.size() + grid.size(), 0.0);
    double* out = tree.leaf_cumhaz.data() + leaf_id * grid.size();

    double h = 0.0;
    std::size_t at_risk = obs.size();
    std::size_t i = 0, g = 0;
    while (i < obs.size()) {
      const double t = obs[i].first;
      std::size_t events = 0, total = 0;
      while (i < obs.size() && obs[i].first == t) {
        events += static_cast<std::size_t>(obs[i].second);
        ++total;
        ++i;
      }
      if (events > 0) {
        while (g < grid.size() && grid[g] < t) out[g++] = h;
        h += static_cast<double>(events) / static_cast<double>(at_risk);
      }
      at_risk -= total;
    }
    while (g < grid.size()) out[g++] = h;
    return leaf_id;
  }
};

Tree fit_tree(const SurvivalDataset& train, const RSFParams& params,
              const std::vector<double>& grid, int mtry, std::uint64_t seed) {
  TreeBuilder builder(train, params, grid, mtry, seed);
  builder.build();
  return std::move(builder.tree);
}

RSFModel fit_rsf_impl(const SurvivalDataset& train, const RSFParams& params,
                      bool parallel) {
  if (train.n_rows < 1 || train.n_features < 1) {
    throw DataError("rsf: empty training set");
  }
  if (params.tree_count < 1) throw DataError("rsf: tree_count must be >= 1");
  if (params.min_node_size < 1) throw DataError("rsf: min_node_size must be >= 1");
  if (train.event_count() == 0) {
    throw DataError("rsf: training set has no events; split statistic undefined");
  }
  int mtry = params.mtry;
  if (mtry == 0) {
    mtry = static_cast<int>(
        std::ceil(std::sqrt(static_cast<double>(train.n_features))));
  }
  if (mtry < 1 || mtry > static_cast<int>(train.n_features)) {
    throw DataError("rsf: mtry out of [1, p]");
  }

  RSFModel model;
  model.n_features = train.n_features;
  for (std::size_t i = 0; i < train.n_rows; ++i) {
    if (train.status[i] == 1) model.time_grid.push_back(train.time[i]);
  }
  std::sort(model.time_grid.begin(), model.time_grid.end());
  model.time_grid.erase(std::unique(model.time_grid.begin(), model.time_grid.end()),
                        model.time_grid.end());

  model.trees.resize(params.tree_count);
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < params.tree_count; ++t) {
      model.trees[t] =
          fit_tree(train, params, model.time_grid, mtry,
                   derive_seed(params.seed, {0x7ee5, static_cast<std::uint64_t>(t)}));
    }
  } else {
    for (int t = 0; t < params.tree_count; ++t) {
      model.trees[t] =
          fit_tree(train, params, model.time_grid, mtry,
                   derive_seed(params.seed, {0x7ee5, static_cast<std::uint64_t>(t)}));
    }
  }
  return model;
}

}  // namespace

RSFModel fit_rsf(const SurvivalDataset& train, const RSFParams& params) {
  return fit_rsf_impl(train, params, true);
}

RSFModel fit_rsf_serial(const SurvivalDataset& train, const RSFParams& params) {
  return fit_rsf_impl(train, params, false);
}

const double* RSFModel::leaf_for(const Tree& tree, const double* row) const {
  int node = 0;
  while (tree.nodes[node].leaf < 0) {
    const TreeNode& nd = tree.nodes[node];
    node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.leaf_cumhaz.data() + tree.nodes[node].leaf * time_grid.size();
}

DistributionPrediction predict_distribution(const RSFModel& model,
                                            const std::vector<double>& features,
                                            std::size_t n_rows) {
  if (features.size() != n_rows * model.n_features) {
    throw DataError("predict: feature width mismatch");
  }
  const std::size_t g = model.time_grid.size();
  DistributionPrediction pred;
  pred.time_grid = model.time_grid;
  pred.n_rows = n_rows;
  pred.survival.assign(n_rows * g, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_rows); ++i) {
    const double* row = features.data() + i * model.n_features;
    double* out = pred.survival.data() + i * g;
    for (const Tree& tree : model.trees) {
      const double* leaf = model.leaf_for(tree, row);
      for (std::size_t k = 0; k < g; ++k) out[k] += leaf[k];
    }
    const double inv = 1.0 / static_cast<double>(model.trees.size());
    for (std::size_t k = 0; k < g; ++k) out[k] = std::exp(-out[k] * inv);
  }
  return pred;
}

DistributionPrediction predict_distribution(const RSFModel& model,
                                            const SurvivalDataset& ds) {
  return predict_distribution(model, ds.features, ds.n_rows);
}

RiskPrediction predict_risk(const RSFModel& model, const std::vector<double>& features,
                            std::size_t n_rows) {
  if (features.size() != n_rows * model.n_features) {
    throw DataError("predict: feature width mismatch");
  }
  const std::size_t g = model.time_grid.size();
  RiskPrediction pred;
  pred.risk.assign(n_rows, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_rows); ++i) {
    const double* row = features.data() + i * model.n_features;
    double total = 0.0;
    for (const Tree& tree : model.trees) {
      const double* leaf = model.leaf_for(tree, row);
      for (std::size_t k = 0; k < g; ++k) total += leaf[k];
    }
    pred.risk[i] = total / static_cast<double>(model.trees.size());
  }
  return pred;
}

RiskPrediction predict_risk(const RSFModel& model, const SurvivalDataset& ds) {
  return predict_risk(model, ds.features, ds.n_rows);
}

void save_model(const RSFModel& model, const std::string& path) {
  nlohmann::json j;
  j["n_features"] = model.n_features;
  j["time_grid"] = model.time_grid;
  auto& trees = j["trees"] = nlohmann::json::array();
  for (const Tree& tree : model.trees) {
    nlohmann::json tj;
    auto& nodes = tj["nodes"] = nlohmann::json::array();
    for (const TreeNode& nd : tree.nodes) {
      nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.leaf});
    }
    tj["leaf_cumhaz"] = tree.leaf_cumhaz;
    tj["inbag"] = tree.inbag;
    trees.push_back(std::move(tj));
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << j.dump();
}

RSFModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  RSFModel model;
  model.n_features = j.at("n_features").get<std::size_t>();
  model.time_grid = j.at("time_grid").get<std::vector<double>>();
  for (const auto& tj : j.at("trees")) {
    Tree tree;
    for (const auto& nj : tj.at("nodes")) {
      TreeNode nd;
      nd.feature = nj.at(0).get<int>();
      nd.threshold = nj.at(1).get<double>();
      nd.left = nj.at(2).get<int>();
      nd.right = nj.at(3).get<int>();
      nd.leaf = nj.at(4).get<int>();
      tree.nodes.push_back(nd);
    }
    tree.leaf_cumhaz = tj.at("leaf_cumhaz").get<std::vector<double>>();
    tree.inbag = tj.at("inbag").get<std::vector<std::uint32_t>>();
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace survaudit
