#include <doctest.h>

#include <cmath>
#include <vector>

#include "survaudit/km.hpp"
#include "survaudit/rng.hpp"

using namespace survaudit;

TEST_CASE("product-limit hand case") {
  const std::vector<double> t{1, 2, 3};
  const std::vector<int> s{1, 1, 0};
  const SurvivalCurve km = fit_km(t, s);
  CHECK(km.eval_survival(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(km.eval_survival(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(km.eval_survival(3) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Nelson-Aalen at the same steps.
  CHECK(km.eval_cumhaz(2) == doctest::Approx(1.0 / 3.0 + 1.0 / 2.0).epsilon(1e-12));
}

TEST_CASE("no events means S stays 1") {
  const std::vector<double> t{1, 2, 3};
  const std::vector<int> s{0, 0, 0};
  const SurvivalCurve km = fit_km(t, s);
  CHECK(km.eval_survival(100.0) == 1.0);
  CHECK(km.eval_cumhaz(100.0) == 0.0);
}

TEST_CASE("single event exhausts the risk set") {
  const std::vector<double> t{5};
  const std::vector<int> s{1};
  const SurvivalCurve km = fit_km(t, s);
  CHECK(km.eval_survival(5) == 0.0);
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS(fit_km(std::vector<double>{}, std::vector<int>{}));
}

TEST_CASE("censoring estimator flips the status") {
  const std::vector<double> t{1, 2, 3};
  const std::vector<int> s{1, 0, 1};
  const SurvivalCurve g = fit_censoring_km(t, s);
  CHECK(g.eval_survival(2) == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<int> all_events{1, 1, 1};
  const SurvivalCurve g1 = fit_censoring_km(t, all_events);
  CHECK(g1.eval_survival(3) == 1.0);

  // Flipping twice recovers the event estimator.
  std::vector<int> flipped{0, 1, 0};
  const SurvivalCurve km = fit_km(t, s);
  const SurvivalCurve km2 = fit_censoring_km(t, flipped);
  CHECK(km.times == km2.times);
  CHECK(km.survival == km2.survival);
}

TEST_CASE("step-function evaluation semantics") {
  SurvivalCurve c;
  c.times = {2.0};
  c.survival = {0.5};
  c.cumhaz = {0.7};
  CHECK(c.eval_survival(0.0, Side::Right) == 1.0);
  CHECK(c.eval_survival(2.0, Side::Left) == 1.0);
  CHECK(c.eval_survival(2.0, Side::Right) == 0.5);
  CHECK(c.eval_survival(99.0, Side::Right) == 0.5);
  CHECK_THROWS(c.eval_survival(-1.0));
}

TEST_CASE("no censoring gives the empirical survival function") {
  Rng rng(7);
  std::vector<double> t;
  std::vector<int> s;
  for (int i = 0; i < 100; ++i) {
    t.push_back(rng.exponential() + 0.01);
    s.push_back(1);
  }
  const SurvivalCurve km = fit_km(t, s);
  for (double q : {0.1, 0.5, 1.0, 2.0}) {
    std::size_t surviving = 0;
    for (double ti : t) surviving += ti > q ? 1 : 0;
    CHECK(km.eval_survival(q) ==
          doctest::Approx(static_cast<double>(surviving) / t.size()).epsilon(1e-12));
  }
}

TEST_CASE("survival is non-increasing and bounded on random inputs") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 5 + rng.below(50);
    std::vector<double> t;
    std::vector<int> s;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(1.0 + rng.below(10));  // ties likely
      s.push_back(rng.uniform() < 0.5 ? 1 : 0);
    }
    const SurvivalCurve km = fit_km(t, s);
    double prev = 1.0;
    for (std::size_t j = 0; j < km.times.size(); ++j) {
      CHECK(km.survival[j] >= -1e-15);
      CHECK(km.survival[j] <= prev + 1e-15);
      prev = km.survival[j];
      if (j > 0) CHECK(km.cumhaz[j] >= km.cumhaz[j - 1]);
    }
  }
}

TEST_CASE("exp(-cumhaz) dominates survival and is close for small hazards") {
  Rng rng(3);
  std::vector<double> t;
  std::vector<int> s;
  for (int i = 0; i < 400; ++i) {
    t.push_back(rng.exponential() + 0.01);
    s.push_back(rng.uniform() < 0.7 ? 1 : 0);
  }
  const SurvivalCurve km = fit_km(t, s);
  for (std::size_t j = 0; j < km.times.size(); ++j) {
    const double e = std::exp(-km.cumhaz[j]);
    CHECK(e >= km.survival[j] - 1e-12);
    if (km.survival[j] > 0.05) {
      CHECK(e == doctest::Approx(km.survival[j]).epsilon(0.1));
    }
  }
}
