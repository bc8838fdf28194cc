// Compares the OpenMP forest fit against the serial reference and checks that
// both produce identical predictions.

#include <omp.h>

#include <chrono>
#include <cstdio>

#include "survaudit/dataset.hpp"
#include "survaudit/rsf.hpp"

using namespace survaudit;

namespace {

template <typename F>
double time_seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  const auto end = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(end - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 2000;
  int trees = 100;
  if (argc > 1) n = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) trees = std::atoi(argv[2]);

  SynthConfig cfg;
  cfg.n = n;
  cfg.p = 5;
  cfg.target_censoring = 0.3;
  const SurvivalDataset data = generate_synthetic(cfg, 7);

  RSFParams params;
  params.tree_count = trees;
  params.seed = 11;

  RSFModel serial, parallel;
  const double t_serial = time_seconds([&] { serial = fit_rsf_serial(data, params); });
  const double t_parallel = time_seconds([&] { parallel = fit_rsf(data, params); });

  const RiskPrediction r_serial = predict_risk(serial, data);
  const RiskPrediction r_parallel = predict_risk(parallel, data);
  bool identical = r_serial.risk.size() == r_parallel.risk.size();
  for (std::size_t i = 0; identical && i < r_serial.risk.size(); ++i) {
    identical = r_serial.risk[i] == r_parallel.risk[i];
  }

  std::printf("n=%zu trees=%d threads=%d\n", n, trees, omp_get_max_threads());
  std::printf("serial   fit: %8.3f s\n", t_serial);
  std::printf("parallel fit: %8.3f s  (speedup %.2fx)\n", t_parallel,
              t_serial / t_parallel);
  std::printf("predictions identical: %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
