#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "survaudit/biasing.hpp"
#include "survaudit/fairness.hpp"
#include "survaudit/km.hpp"
#include "survaudit/rng.hpp"
#include "survaudit/rsf.hpp"

using namespace survaudit;

namespace {

SurvivalDataset signal_data(std::size_t n, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.p = 4;
  cfg.effect_weights = {1.5, -1.5, 1.0, -1.0};
  cfg.target_censoring = 0.25;
  return generate_synthetic(cfg, seed);
}

struct AuditSetup {
  SurvivalDataset test;
  DistributionPrediction pred;
  RiskPrediction risk;
  CensoringWeights G;
  DistributionPrediction baseline;
};

AuditSetup make_setup(std::uint64_t seed, std::size_t n_test) {
  const SurvivalDataset train = signal_data(300, seed);
  SurvivalDataset test = signal_data(n_test, seed + 1);
  RSFParams params;
  params.tree_count = 30;
  params.seed = seed;
  const RSFModel model = fit_rsf(train, params);
  AuditSetup s{std::move(test),
               {},
               {},
               CensoringWeights{},
               {}};
  s.pred = predict_distribution(model, s.test);
  s.risk = predict_risk(model, s.test);
  s.G = CensoringWeights{fit_censoring_km(s.test.time, s.test.status)};
  s.baseline = broadcast_curve(fit_km(train.time, train.status), s.test.n_rows);
  return s;
}

}  // namespace

TEST_CASE("fairness_gap basics") {
  CHECK(fairness_gap(0.3, 0.3) == 0.0);
  CHECK(fairness_gap(0.2, 0.5) == doctest::Approx(0.3));
  CHECK(fairness_gap(0.5, 0.2) == doctest::Approx(0.3));
  CHECK(fairness_gap(0.049, 0.127) == doctest::Approx(0.078));
  CHECK_THROWS_AS(fairness_gap(0.1, std::nan("")), MetricError);
}

TEST_CASE("fairness_gap triangle bound") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.normal(), b = rng.normal(), c = rng.normal();
    CHECK(fairness_gap(a, c) <= fairness_gap(a, b) + fairness_gap(b, c) + 1e-12);
  }
}

TEST_CASE("duplicated group gives zero gaps") {
  AuditSetup s = make_setup(5, 100);
  // Duplicate every row under two labels: both groups are identical.
  std::vector<std::size_t> rows(s.test.n_rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  SurvivalDataset doubled = concat(s.test, s.test);
  doubled.group.emplace();
  for (std::size_t i = 0; i < s.test.n_rows; ++i) doubled.group->push_back("a");
  for (std::size_t i = 0; i < s.test.n_rows; ++i) doubled.group->push_back("b");

  DistributionPrediction pred2 = s.pred;
  pred2.n_rows = 2 * s.pred.n_rows;
  pred2.survival.insert(pred2.survival.end(), s.pred.survival.begin(),
                        s.pred.survival.end());
  RiskPrediction risk2 = s.risk;
  risk2.risk.insert(risk2.risk.end(), s.risk.risk.begin(), s.risk.risk.end());
  DistributionPrediction base2 = s.baseline;
  base2.n_rows = 2 * s.baseline.n_rows;
  base2.survival.insert(base2.survival.end(), s.baseline.survival.begin(),
                        s.baseline.survival.end());

  const std::vector<Measure> measures(std::begin(kAllMeasures),
                                      std::end(kAllMeasures));
  const auto results = audit_groups(pred2, risk2, doubled, measures, s.G, base2);
  CHECK(results.size() == 8);
  for (const auto& r : results) {
    REQUIRE(!r.error);
    CHECK(r.gap == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("audit is invariant to row order and label swap") {
  AuditSetup s = make_setup(9, 120);
  SurvivalDataset test = s.test;
  test.group.emplace();
  for (std::size_t i = 0; i < test.n_rows; ++i) {
    test.group->push_back(i % 2 == 0 ? "a" : "b");
  }
  const std::vector<Measure> measures(std::begin(kAllMeasures),
                                      std::end(kAllMeasures));
  const auto base = audit_groups(s.pred, s.risk, test, measures, s.G, s.baseline);

  // Permute rows consistently.
  std::vector<std::size_t> perm(test.n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(3);
  rng.shuffle(perm);
  SurvivalDataset shuffled = test.take_rows(perm);
  DistributionPrediction pred_s = s.pred.take_rows(perm);
  DistributionPrediction base_s = s.baseline.take_rows(perm);
  RiskPrediction risk_s;
  for (std::size_t r : perm) risk_s.risk.push_back(s.risk.risk[r]);
  const auto shuffled_res =
      audit_groups(pred_s, risk_s, shuffled, measures, s.G, base_s);

  // Swap labels.
  SurvivalDataset swapped = test;
  for (auto& g : *swapped.group) g = g == "a" ? "b" : "a";
  const auto swapped_res =
      audit_groups(s.pred, s.risk, swapped, measures, s.G, s.baseline);

  for (std::size_t i = 0; i < base.size(); ++i) {
    REQUIRE(!base[i].error);
    CHECK(shuffled_res[i].gap == doctest::Approx(base[i].gap).epsilon(1e-9));
    CHECK(swapped_res[i].gap == doctest::Approx(base[i].gap).epsilon(1e-9));
    CHECK(swapped_res[i].loss_advantaged ==
          doctest::Approx(base[i].loss_disadvantaged).epsilon(1e-9));
  }
}

TEST_CASE("group count other than two is rejected") {
  AuditSetup s = make_setup(13, 60);
  SurvivalDataset test = s.test;
  test.group.emplace(test.n_rows, "only");
  const std::vector<Measure> measures{Measure::Charrell};
  CHECK_THROWS_AS(audit_groups(s.pred, s.risk, test, measures, s.G, s.baseline),
                  DataError);
  for (std::size_t i = 0; i < test.n_rows; ++i) {
    (*test.group)[i] = "g" + std::to_string(i % 3);
  }
  CHECK_THROWS_AS(audit_groups(s.pred, s.risk, test, measures, s.G, s.baseline),
                  DataError);
}

TEST_CASE("unknown measure name errors by name") {
  CHECK_THROWS_WITH_AS(parse_measure("gini"), doctest::Contains("gini"),
                       MetricError);
}

TEST_CASE("per-measure failure leaves other measures intact") {
  AuditSetup s = make_setup(15, 80);
  SurvivalDataset test = s.test;
  test.group.emplace();
  // Group b gets only censored observations: concordance has no pairs there.
  for (std::size_t i = 0; i < test.n_rows; ++i) {
    test.group->push_back(test.status[i] == 1 ? "a" : "b");
  }
  const std::vector<Measure> measures{Measure::Charrell, Measure::Cald};
  const auto results = audit_groups(s.pred, s.risk, test, measures, s.G, s.baseline);
  REQUIRE(results.size() == 2);
  CHECK(results[0].error.has_value());
  CHECK(!results[1].error.has_value());
}

TEST_CASE("permuted-covariate predictions open a concordance gap") {
  const SurvivalDataset train = signal_data(500, 101);
  const SurvivalDataset test = signal_data(500, 102);
  RSFParams params;
  params.tree_count = 40;
  params.seed = 55;
  const RSFModel model = fit_rsf(train, params);
  const RiskPrediction honest = predict_risk(model, test);
  const double c_honest = harrell_c(honest, test.time, test.status).value;

  int positive = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const SurvivalDataset permuted =
        apply_permutation(test, static_cast<std::uint64_t>(trial));
    const RiskPrediction broken = predict_risk(model, permuted);
    const double c_broken = harrell_c(broken, test.time, test.status).value;
    if (fairness_gap(c_honest, c_broken) > 0.0) ++positive;
  }
  CHECK(positive >= 95);
}
