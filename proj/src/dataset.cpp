#include "survaudit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "survaudit/rng.hpp"

namespace survaudit {

std::size_t SurvivalDataset::event_count() const {
  std::size_t c = 0;
  for (int s : status) c += static_cast<std::size_t>(s);
  return c;
}

SurvivalDataset SurvivalDataset::take_rows(const std::vector<std::size_t>& rows) const {
  SurvivalDataset out;
  out.n_rows = rows.size();
  out.n_features = n_features;
  out.features.reserve(rows.size() * n_features);
  out.time.reserve(rows.size());
  out.status.reserve(rows.size());
  out.ids.reserve(rows.size());
  if (group) out.group.emplace();
  for (std::size_t r : rows) {
    for (std::size_t j = 0; j < n_features; ++j) out.features.push_back(feature(r, j));
    out.time.push_back(time[r]);
    out.status.push_back(status[r]);
    out.ids.push_back(ids[r]);
    if (group) out.group->push_back((*group)[r]);
  }
  return out;
}

void SurvivalDataset::validate() const {
  if (n_rows < 1) throw DataError("dataset is empty");
  if (time.size() != n_rows || status.size() != n_rows || ids.size() != n_rows ||
      features.size() != n_rows * n_features ||
      (group && group->size() != n_rows)) {
    throw DataError("dataset column lengths disagree");
  }
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (!(time[i] > 0.0) || !std::isfinite(time[i])) {
      throw DataError("non-positive or non-finite time in row " + std::to_string(i + 1));
    }
    if (status[i] != 0 && status[i] != 1) {
      throw DataError("status outside {0,1} in row " + std::to_string(i + 1));
    }
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      throw DataError("non-finite feature value in row " +
                      std::to_string(i / n_features + 1));
    }
  }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, std::size_t row, const std::string& col) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DataError("non-numeric value '" + s + "' in row " + std::to_string(row) +
                    ", column '" + col + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) {
    throw DataError("non-numeric value '" + s + "' in row " + std::to_string(row) +
                    ", column '" + col + "'");
  }
  return v;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("empty file: " + path);
  const std::vector<std::string> header = split_line(header_line);

  int time_idx = -1, status_idx = -1, group_idx = -1, id_idx = -1;
  std::vector<std::size_t> feat_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& name = header[j];
    if (name == schema.time_col) {
      if (time_idx >= 0) throw DataError("duplicate time column '" + name + "'");
      time_idx = static_cast<int>(j);
    } else if (name == schema.status_col) {
      if (status_idx >= 0) throw DataError("duplicate status column '" + name + "'");
      status_idx = static_cast<int>(j);
    } else if (name == schema.group_col) {
      if (group_idx >= 0) throw DataError("duplicate group column '" + name + "'");
      group_idx = static_cast<int>(j);
    } else if (name == "id") {
      id_idx = static_cast<int>(j);
    } else {
      feat_cols.push_back(j);
    }
  }
  if (time_idx < 0) throw DataError("missing time column '" + schema.time_col + "'");
  if (status_idx < 0) throw DataError("missing status column '" + schema.status_col + "'");

  SurvivalDataset ds;
  ds.n_features = feat_cols.size();
  if (group_idx >= 0) ds.group.emplace();

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    const double t = parse_number(cells[time_idx], row, schema.time_col);
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw DataError("non-positive time in row " + std::to_string(row) +
                      ", column '" + schema.time_col + "'");
    }
    const double st = parse_number(cells[status_idx], row, schema.status_col);
    if (st != 0.0 && st != 1.0) {
      throw DataError("status outside {0,1} in row " + std::to_string(row) +
                      ", column '" + schema.status_col + "'");
    }
    for (std::size_t j : feat_cols) {
      const double v = parse_number(cells[j], row, header[j]);
      if (!std::isfinite(v)) {
        throw DataError("non-finite feature in row " + std::to_string(row) +
                        ", column '" + header[j] + "'");
      }
      ds.features.push_back(v);
    }
    ds.time.push_back(t);
    ds.status.push_back(static_cast<int>(st));
    if (group_idx >= 0) ds.group->push_back(cells[group_idx]);
    if (id_idx >= 0) {
      ds.ids.push_back(static_cast<std::int64_t>(
          parse_number(cells[id_idx], row, "id")));
    } else {
      ds.ids.push_back(static_cast<std::int64_t>(row - 1));
    }
  }
  ds.n_rows = row;
  ds.validate();
  return ds;
}

void save_csv(const SurvivalDataset& ds, const std::string& path,
              const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << "id," << schema.time_col << ',' << schema.status_col;
  if (ds.group) out << ',' << schema.group_col;
  for (std::size_t j = 0; j < ds.n_features; ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    out << ds.ids[i] << ',' << format_full(ds.time[i]) << ',' << ds.status[i];
    if (ds.group) out << ',' << (*ds.group)[i];
    for (std::size_t j = 0; j < ds.n_features; ++j) {
      out << ',' << format_full(ds.feature(i, j));
    }
    out << '\n';
  }
}

SurvivalDataset generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  if (config.n < 1) throw DataError("synthetic n must be >= 1");
  if (!(config.baseline_shape > 0.0)) throw DataError("baseline_shape must be > 0");
  if (!(config.baseline_scale > 0.0)) throw DataError("baseline_scale must be > 0");
  if (config.target_censoring < 0.0 || config.target_censoring >= 1.0) {
    throw DataError("target_censoring must be in [0,1)");
  }
  if (config.group_count < 1) throw DataError("group_count must be >= 1");

  std::vector<double> weights = config.effect_weights;
  if (weights.empty()) {
    weights.resize(config.p);
    for (std::size_t j = 0; j < config.p; ++j) weights[j] = (j % 2 == 0) ? 1.0 : -1.0;
  }
  if (weights.size() != config.p) {
    throw DataError("effect_weights length must equal p");
  }

  const std::size_t n = config.n;
  SurvivalDataset ds;
  ds.n_rows = n;
  ds.n_features = config.p;
  ds.features.resize(n * config.p);
  ds.time.resize(n);
  ds.status.resize(n);
  ds.ids.resize(n);

  Rng rng(derive_seed(seed, {0xda7a}));
  std::vector<double> event_time(n);
  std::vector<double> cens_unit(n);  // unit-rate exponentials, rescaled below
  for (std::size_t i = 0; i < n; ++i) {
    double lin = 0.0;
    for (std::size_t j = 0; j < config.p; ++j) {
      const double x = rng.normal();
      ds.features[i * config.p + j] = x;
      lin += x * weights[j];
    }
    const double scale = config.baseline_scale * std::exp(lin);
    event_time[i] = scale * std::pow(rng.exponential(), 1.0 / config.baseline_shape);
    cens_unit[i] = rng.exponential();
    ds.ids[i] = static_cast<std::int64_t>(i);
  }

  if (config.target_censoring <= 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      ds.time[i] = std::max(event_time[i], 1e-300);
      ds.status[i] = 1;
    }
  } else {
    // Censoring time C_i = cens_unit[i] / rate; realized censoring fraction
    // is monotone in rate, so bisect on log-rate.
    auto cens_frac = [&](double rate) {
      std::size_t c = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (cens_unit[i] / rate < event_time[i]) ++c;
      }
      return static_cast<double>(c) / static_cast<double>(n);
    };
    double lo = 1e-12, hi = 1e12;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (cens_frac(mid) < config.target_censoring) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    const double rate = std::sqrt(lo * hi);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = cens_unit[i] / rate;
      ds.status[i] = event_time[i] <= c ? 1 : 0;
      ds.time[i] = std::max(std::min(event_time[i], c), 1e-300);
    }
  }

  if (config.group_count > 1) {
    ds.group.emplace(n);
    for (std::size_t i = 0; i < n; ++i) {
      (*ds.group)[i] = "g" + std::to_string(rng.below(config.group_count));
    }
  }
  ds.validate();
  return ds;
}

std::pair<SurvivalDataset, SurvivalDataset> split_count(
    const SurvivalDataset& ds, std::size_t count, std::uint64_t seed) {
  if (ds.n_rows < 2) throw DataError("split requires n >= 2");
  if (count > ds.n_rows) throw DataError("split count exceeds n");
  std::vector<std::size_t> idx(ds.n_rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0x5b17}));
  rng.shuffle(idx);
  std::vector<std::size_t> first(idx.begin(), idx.begin() + count);
  std::vector<std::size_t> second(idx.begin() + count, idx.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {ds.take_rows(first), ds.take_rows(second)};
}

std::pair<SurvivalDataset, SurvivalDataset> split_random(
    const SurvivalDataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("fraction must be in (0,1)");
  const auto count = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(ds.n_rows)));
  return split_count(ds, count, seed);
}

SurvivalDataset concat(const SurvivalDataset& a, const SurvivalDataset& b) {
  if (a.n_rows == 0) return b;
  if (b.n_rows == 0) return a;
  if (a.n_features != b.n_features) throw DataError("concat: feature widths differ");
  if (a.group.has_value() != b.group.has_value()) {
    throw DataError("concat: group presence differs");
  }
  SurvivalDataset out = a;
  out.n_rows += b.n_rows;
  out.features.insert(out.features.end(), b.features.begin(), b.features.end());
  out.time.insert(out.time.end(), b.time.begin(), b.time.end());
  out.status.insert(out.status.end(), b.status.begin(), b.status.end());
  out.ids.insert(out.ids.end(), b.ids.begin(), b.ids.end());
  if (out.group) out.group->insert(out.group->end(), b.group->begin(), b.group->end());
  return out;
}

FoldAssignment kfold_partition(const SurvivalDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw DataError("k must be >= 2");
  if (ds.n_rows < static_cast<std::size_t>(k)) throw DataError("n < k");
  std::vector<std::size_t> idx(ds.n_rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(derive_seed(seed, {0xf01d}));
  rng.shuffle(idx);
  FoldAssignment fa;
  fa.k = k;
  fa.fold_index.assign(ds.n_rows, 0);
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    fa.fold_index[idx[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return fa;
}

SurvivalDataset subset_by_group(const SurvivalDataset& ds, const std::string& label) {
  if (!ds.group) throw DataError("dataset has no group column");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    if ((*ds.group)[i] == label) rows.push_back(i);
  }
  if (rows.empty()) throw DataError("group label not present: '" + label + "'");
  return ds.take_rows(rows);
}

std::vector<std::string> group_labels(const SurvivalDataset& ds) {
  if (!ds.group) throw DataError("dataset has no group column");
  std::set<std::string> labels(ds.group->begin(), ds.group->end());
  return {labels.begin(), labels.end()};
}

}  // namespace survaudit
