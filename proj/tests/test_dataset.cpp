#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "survaudit/dataset.hpp"
#include "survaudit/km.hpp"
#include "survaudit/metrics.hpp"

using namespace survaudit;

namespace {

std::string write_temp(const std::string& content) {
  static int counter = 0;
  std::string path = "test_dataset_tmp_" + std::to_string(counter++) + ".csv";
  std::ofstream out(path);
  out << content;
  return path;
}

std::multiset<std::vector<double>> row_multiset(const SurvivalDataset& ds) {
  std::multiset<std::vector<double>> rows;
  for (std::size_t i = 0; i < ds.n_rows; ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < ds.n_features; ++j) row.push_back(ds.feature(i, j));
    row.push_back(ds.time[i]);
    row.push_back(static_cast<double>(ds.status[i]));
    rows.insert(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("load_csv parses a small file") {
  const auto path = write_temp("time,status,x0\n1,1,0.5\n2,0,1.5\n3,1,2.5\n");
  const SurvivalDataset ds = load_csv(path);
  CHECK(ds.n_rows == 3);
  CHECK(ds.n_features == 1);
  CHECK(ds.time == std::vector<double>{1, 2, 3});
  CHECK(ds.status == std::vector<int>{1, 0, 1});
  CHECK(ds.feature(2, 0) == 2.5);
  std::remove(path.c_str());
}

TEST_CASE("load_csv rejects bad rows with locations") {
  const auto neg = write_temp("time,status,x0\n1,1,0.5\n-1,0,1.5\n");
  CHECK_THROWS_WITH_AS(load_csv(neg), doctest::Contains("row 2"), DataError);
  std::remove(neg.c_str());

  const auto bad_status = write_temp("time,status,x0\n1,2,0.5\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_status), doctest::Contains("row 1"), DataError);
  std::remove(bad_status.c_str());

  const auto non_numeric = write_temp("time,status,x0\n1,1,abc\n");
  CHECK_THROWS_WITH_AS(load_csv(non_numeric), doctest::Contains("x0"), DataError);
  std::remove(non_numeric.c_str());

  CHECK_THROWS_AS(load_csv("does_not_exist.csv"), DataError);

  const auto missing = write_temp("t,status,x0\n1,1,0.5\n");
  CHECK_THROWS_WITH_AS(load_csv(missing), doctest::Contains("time"), DataError);
  std::remove(missing.c_str());
}

TEST_CASE("csv round-trip preserves the dataset") {
  SynthConfig cfg;
  cfg.n = 50;
  cfg.p = 3;
  cfg.group_count = 2;
  const SurvivalDataset ds = generate_synthetic(cfg, 5);
  const auto path = write_temp("");
  save_csv(ds, path);
  const SurvivalDataset back = load_csv(path);
  CHECK(back.n_rows == ds.n_rows);
  CHECK(back.features == ds.features);
  CHECK(back.time == ds.time);
  CHECK(back.status == ds.status);
  CHECK(back.ids == ds.ids);
  REQUIRE(back.group.has_value());
  CHECK(*back.group == *ds.group);
  std::remove(path.c_str());
}

TEST_CASE("generate_synthetic hits the target censoring fraction") {
  SynthConfig cfg;
  cfg.n = 1000;
  cfg.target_censoring = 0.4;
  const SurvivalDataset ds = generate_synthetic(cfg, 99);
  const double realized =
      1.0 - static_cast<double>(ds.event_count()) / static_cast<double>(ds.n_rows);
  CHECK(realized == doctest::Approx(0.4).epsilon(0.125));  // within +-0.05
}

TEST_CASE("generate_synthetic is deterministic") {
  SynthConfig cfg;
  cfg.n = 200;
  cfg.group_count = 2;
  const SurvivalDataset a = generate_synthetic(cfg, 123);
  const SurvivalDataset b = generate_synthetic(cfg, 123);
  CHECK(a.features == b.features);
  CHECK(a.time == b.time);
  CHECK(a.status == b.status);
  CHECK(*a.group == *b.group);
  const SurvivalDataset c = generate_synthetic(cfg, 124);
  CHECK(a.time != c.time);
}

TEST_CASE("zero effect weights give chance-level concordance of the true score") {
  SynthConfig cfg;
  cfg.n = 600;
  cfg.p = 3;
  cfg.effect_weights = {0.0, 0.0, 0.0};
  cfg.target_censoring = 0.0;
  const SurvivalDataset ds = generate_synthetic(cfg, 31);
  auto [train, test] = split_random(ds, 0.5, 1);
  // With no signal any feature-based score is noise; use x0 as the risk.
  RiskPrediction risk;
  for (std::size_t i = 0; i < test.n_rows; ++i) risk.risk.push_back(test.feature(i, 0));
  const double c = harrell_c(risk, test.time, test.status).value;
  CHECK(c == doctest::Approx(0.5).epsilon(0.1));  // 0.5 +- 0.05
}

TEST_CASE("split_random sizes and multiset preservation") {
  SynthConfig cfg;
  cfg.n = 10;
  const SurvivalDataset ds = generate_synthetic(cfg, 3);
  {
    auto [a, b] = split_random(ds, 0.5, 7);
    CHECK(a.n_rows == 5);
    CHECK(b.n_rows == 5);
    auto combined = row_multiset(a);
    for (const auto& r : row_multiset(b)) combined.insert(r);
    CHECK(combined == row_multiset(ds));
  }
  {
    auto [a, b] = split_random(ds, 0.3, 7);
    CHECK(a.n_rows == 3);
    CHECK(b.n_rows == 7);
  }
  SurvivalDataset single = ds.take_rows({0});
  CHECK_THROWS_AS(split_random(single, 0.5, 7), DataError);
}

TEST_CASE("different seeds give different partitions") {
  SynthConfig cfg;
  cfg.n = 100;
  const SurvivalDataset ds = generate_synthetic(cfg, 4);
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto [a1, _1] = split_random(ds, 0.5, 2 * s);
    auto [a2, _2] = split_random(ds, 0.5, 2 * s + 1);
    if (a1.ids != a2.ids) ++differing;
  }
  CHECK(differing == 20);
}

TEST_CASE("kfold_partition balance and determinism") {
  SynthConfig cfg;
  cfg.n = 10;
  const SurvivalDataset ds = generate_synthetic(cfg, 8);
  const FoldAssignment fa = kfold_partition(ds, 3, 11);
  std::vector<int> sizes(3, 0);
  for (int f : fa.fold_index) sizes[f]++;
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{3, 3, 4});

  const FoldAssignment fb = kfold_partition(ds, 3, 11);
  CHECK(fa.fold_index == fb.fold_index);

  SynthConfig cfg9;
  cfg9.n = 9;
  const SurvivalDataset ds9 = generate_synthetic(cfg9, 8);
  const FoldAssignment f9 = kfold_partition(ds9, 3, 1);
  std::vector<int> s9(3, 0);
  for (int f : f9.fold_index) s9[f]++;
  CHECK(s9 == std::vector<int>{3, 3, 3});

  CHECK_THROWS_AS(kfold_partition(ds.take_rows({0, 1}), 3, 1), DataError);
}

TEST_CASE("subset_by_group") {
  SurvivalDataset ds;
  ds.n_rows = 3;
  ds.n_features = 1;
  ds.features = {1, 2, 3};
  ds.time = {1, 2, 3};
  ds.status = {1, 1, 1};
  ds.ids = {0, 1, 2};
  ds.group = std::vector<std::string>{"a", "b", "a"};

  const SurvivalDataset sub = subset_by_group(ds, "a");
  CHECK(sub.ids == std::vector<std::int64_t>{0, 2});
  CHECK_THROWS_WITH_AS(subset_by_group(ds, "zz"), doctest::Contains("zz"), DataError);

  SurvivalDataset all = ds;
  all.group = std::vector<std::string>{"a", "a", "a"};
  const SurvivalDataset same = subset_by_group(all, "a");
  CHECK(same.ids == ds.ids);
  CHECK(same.features == ds.features);

  SurvivalDataset no_group = ds;
  no_group.group.reset();
  CHECK_THROWS_AS(subset_by_group(no_group, "a"), DataError);
}
