#include "survaudit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "survaudit/rng.hpp"

namespace survaudit {

namespace {

// Regularized incomplete beta via the Lentz continued fraction.
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value for a t statistic with df degrees of freedom.
double t_pvalue(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  return reg_inc_beta(df / 2.0, 0.5, df / (df + t * t));
}

std::vector<double> mid_ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::pair<double, double> spearman_rho(std::span<const double> x,
                                       std::span<const double> y) {
  if (x.size() != y.size()) throw MetricError("spearman_rho: lengths disagree");
  const std::size_t n = x.size();
  if (n < 3) throw MetricError("spearman_rho: need at least 3 points");
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
    sxy += (rx[i] - mx) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw MetricError("spearman_rho: zero variance");
  }
  double rho = sxy / std::sqrt(sxx * syy);
  rho = std::clamp(rho, -1.0, 1.0);
  if (std::abs(rho) == 1.0) return {rho, 0.0};
  const double df = static_cast<double>(n) - 2.0;
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  return {rho, t_pvalue(t, df)};
}

OlsResult ols_slope_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw MetricError("ols_slope_test: lengths disagree");
  const std::size_t n = x.size();
  if (n < 3) throw MetricError("ols_slope_test: need at least 3 points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw MetricError("ols_slope_test: constant x");
  OlsResult res;
  res.beta = sxy / sxx;
  res.alpha = my - res.beta * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - res.alpha - res.beta * x[i];
    rss += r * r;
  }
  const double df = static_cast<double>(n) - 2.0;
  const double se = std::sqrt(rss / df / sxx);
  if (se == 0.0) {
    res.p = res.beta == 0.0 ? 1.0 : 0.0;
  } else {
    res.p = t_pvalue(res.beta / se, df);
  }
  return res;
}

std::vector<double> holm_correct(const std::vector<double>& p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw MetricError("holm: p-value outside [0,1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return p_values[a] < p_values[b];
  });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double adj = std::min(1.0, static_cast<double>(m - i) * p_values[order[i]]);
    running = std::max(running, adj);
    adjusted[order[i]] = running;
  }
  return adjusted;
}

SweepResult sigma_sweep(const std::vector<NamedDataset>& datasets,
                        const std::vector<double>& grid,
                        const std::vector<Measure>& measures, BiasMethod method,
                        const RSFParams& learner_params, const BiasRunConfig& config) {
  if (grid.empty()) throw DataError("sigma grid is empty");
  for (double s : grid) {
    if (s < 0.0 || s >= 1.0) throw DataError("sigma values must be in [0,1)");
  }

  struct Cell {
    bool ok = false;
    std::string error;
    BiasRunResult result;
  };
  const std::size_t n_cells = datasets.size() * grid.size();
  std::vector<Cell> cells(n_cells);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_cells); ++c) {
    const std::size_t d = static_cast<std::size_t>(c) / grid.size();
    const std::size_t s = static_cast<std::size_t>(c) % grid.size();
    BiasRunConfig cell_cfg = config;
    cell_cfg.seed = derive_seed(config.seed, {static_cast<std::uint64_t>(d),
                                              static_cast<std::uint64_t>(s)});
    try {
      cells[c].result = run_bias_algorithm(datasets[d].data, grid[s], measures,
                                           learner_params, method, cell_cfg);
      cells[c].ok = true;
    } catch (const std::exception& e) {
      cells[c].error = e.what();
    }
  }

  SweepResult out;
  std::set<std::string> failed;
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (std::size_t s = 0; s < grid.size(); ++s) {
      const Cell& cell = cells[d * grid.size() + s];
      if (!cell.ok) {
        if (failed.insert(datasets[d].id).second) {
          out.failures.emplace_back(datasets[d].id,
                                    "sigma=" + fmt(grid[s]) + ": " + cell.error);
        }
        continue;
      }
      for (Measure m : measures) {
        SweepRow row;
        row.dataset = datasets[d].id;
        row.method = method;
        row.measure = m;
        row.sigma = grid[s];
        row.fl_mean = cell.result.mean(m);
        row.fl_sd = cell.result.sd(m);
        row.repetitions = config.repetitions;
        out.rows.push_back(std::move(row));
      }
    }
  }
  return out;
}

Report build_report(const SweepResult& sweep) {
  if (sweep.rows.empty()) throw MetricError("build_report: empty sweep");
  std::set<double> sigmas;
  for (const SweepRow& r : sweep.rows) sigmas.insert(r.sigma);
  if (sigmas.size() < 3) {
    throw MetricError("build_report: need at least 3 distinct sigma levels, have " +
                      std::to_string(sigmas.size()));
  }

  std::set<BiasMethod> methods;
  std::set<Measure> measures;
  for (const SweepRow& r : sweep.rows) {
    methods.insert(r.method);
    measures.insert(r.measure);
  }

  // Canonical order so the statistics do not depend on input row order
  // (floating-point sums are order-sensitive).
  std::vector<SweepRow> ordered = sweep.rows;
  std::sort(ordered.begin(), ordered.end(),
            [](const SweepRow& a, const SweepRow& b) {
              return std::tie(a.method, a.measure, a.dataset, a.sigma, a.fl_mean) <
                     std::tie(b.method, b.measure, b.dataset, b.sigma, b.fl_mean);
            });

  Report report;
  for (BiasMethod method : methods) {
    std::vector<StatsRow> rows;
    for (Measure m : kAllMeasures) {
      if (!measures.count(m)) continue;
      std::vector<double> xs, ys;
      std::map<double, std::pair<double, int>> by_sigma;
      for (const SweepRow& r : ordered) {
        if (r.method != method || r.measure != m) continue;
        xs.push_back(r.sigma);
        ys.push_back(r.fl_mean);
        auto& acc = by_sigma[r.sigma];
        acc.first += r.fl_mean;
        acc.second += 1;
      }
      if (xs.empty()) continue;

      StatsRow sr;
      sr.measure = m;
      sr.method = method;
      const OlsResult ols = ols_slope_test(xs, ys);
      sr.alpha = ols.alpha;
      sr.beta = ols.beta;
      sr.p_beta = ols.p;

      std::vector<double> sg, gm;
      auto& means = report.sigma_means[{method, m}];
      for (const auto& [sigma, acc] : by_sigma) {
        const double mean = acc.first / acc.second;
        sg.push_back(sigma);
        gm.push_back(mean);
        means[sigma] = mean;
      }
      try {
        std::tie(sr.rho, sr.p_rho) = spearman_rho(sg, gm);
      } catch (const MetricError&) {
        sr.rho_defined = false;
        sr.rho = 0.0;
        sr.p_rho = 1.0;
      }
      rows.push_back(sr);
    }

    std::vector<double> pb, pr;
    for (const StatsRow& r : rows) {
      pb.push_back(r.p_beta);
      pr.push_back(r.p_rho);
    }
    const auto pb_adj = holm_correct(pb);
    const auto pr_adj = holm_correct(pr);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].p_beta_adj = pb_adj[i];
      rows[i].p_rho_adj = pr_adj[i];
      rows[i].significant_beta = pb_adj[i] < 0.05;
      rows[i].significant_rho = rows[i].rho_defined && pr_adj[i] < 0.05;
      rows[i].slope_negligible =
          rows[i].significant_beta && std::abs(rows[i].beta) < 0.02;
    }
    report.stats.insert(report.stats.end(), rows.begin(), rows.end());
  }
  return report;
}

std::string Report::render_text() const {
  std::ostringstream out;
  std::set<BiasMethod> methods;
  for (const StatsRow& r : stats) methods.insert(r.method);

  out << "Regression F_L = alpha + sigma*beta and Spearman rho(sigma, mean F_L).\n"
      << "'*' marks p < 0.05 after Holm's correction within the method family.\n\n";
  for (BiasMethod method : methods) {
    out << "== " << bias_method_name(method) << " ==\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s  %s\n", "measure",
                  "alpha", "beta", "rho", "notes");
    out << line;
    for (const StatsRow& r : stats) {
      if (r.method != method) continue;
      std::string beta_s = fmt(r.beta) + (r.significant_beta ? "*" : "");
      std::string rho_s = r.rho_defined ? fmt(r.rho) + (r.significant_rho ? "*" : "")
                                        : "undef";
      std::string notes = r.slope_negligible ? "slope<0.02" : "";
      std::snprintf(line, sizeof(line), "%-10s %10.3f %10s %10s  %s\n",
                    measure_name(r.measure).c_str(), r.alpha, beta_s.c_str(),
                    rho_s.c_str(), notes.c_str());
      out << line;
    }
    out << '\n';

    out << "Per-sigma grand means (" << bias_method_name(method) << "):\n";
    std::set<double> sigmas;
    for (const auto& [key, means] : sigma_means) {
      if (key.first != method) continue;
      for (const auto& [s, v] : means) sigmas.insert(s);
    }
    out << "measure";
    for (double s : sigmas) out << '\t' << fmt(s);
    out << '\n';
    for (Measure m : kAllMeasures) {
      const auto it = sigma_means.find({method, m});
      if (it == sigma_means.end()) continue;
      out << measure_name(m);
      for (double s : sigmas) {
        const auto v = it->second.find(s);
        out << '\t' << (v == it->second.end() ? "-" : fmt(v->second));
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

std::string Report::render_stats_csv() const {
  std::ostringstream out;
  out << "method,measure,alpha,beta,p_beta,p_beta_holm,significant_beta,"
         "rho,p_rho,p_rho_holm,significant_rho,rho_defined,slope_negligible\n";
  for (const StatsRow& r : stats) {
    out << bias_method_name(r.method) << ',' << measure_name(r.measure) << ','
        << fmt(r.alpha) << ',' << fmt(r.beta) << ',' << fmt(r.p_beta) << ','
        << fmt(r.p_beta_adj) << ',' << (r.significant_beta ? 1 : 0) << ','
        << fmt(r.rho) << ',' << fmt(r.p_rho) << ',' << fmt(r.p_rho_adj) << ','
        << (r.significant_rho ? 1 : 0) << ',' << (r.rho_defined ? 1 : 0) << ','
        << (r.slope_negligible ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write sweep file: " + path);
  out << "dataset,method,measure,sigma,fl_mean,fl_sd,repetitions\n";
  for (const SweepRow& r : sweep.rows) {
    out << r.dataset << ',' << bias_method_name(r.method) << ','
        << measure_name(r.measure) << ',' << fmt(r.sigma) << ',' << fmt(r.fl_mean)
        << ',' << fmt(r.fl_sd) << ',' << r.repetitions << '\n';
  }
}

SweepResult read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sweep file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty sweep file: " + path);
  SweepResult out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) {
      throw DataError("sweep file line " + std::to_string(lineno) +
                      ": expected 7 fields, got " + std::to_string(cells.size()));
    }
    try {
      SweepRow row;
      row.dataset = cells[0];
      row.method = parse_bias_method(cells[1]);
      row.measure = parse_measure(cells[2]);
      row.sigma = std::stod(cells[3]);
      row.fl_mean = std::stod(cells[4]);
      row.fl_sd = std::stod(cells[5]);
      row.repetitions = std::stoi(cells[6]);
      out.rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw DataError("sweep file line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace survaudit
