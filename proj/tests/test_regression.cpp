#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ctsense/gbr.hpp"

using namespace ctsense;

namespace {

Dataset make_dataset(int n, std::uint64_t seed, int n_features = 4) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return (rng() >> 11) * 0x1.0p-53; };
  Dataset d;
  for (int i = 0; i < n; ++i) {
    DataRow r;
    for (int f = 0; f < n_features; ++f) r.features.push_back(unit() * 10.0);
    r.inlet_mm = unit() * 10.0;
    r.outlet_mm = unit() * 10.0;
    r.total_mm = r.inlet_mm + r.outlet_mm;
    d.rows.push_back(r);
  }
  return d;
}

// Exhaustive oracle: best (feature, midpoint) split by SSE reduction, ties to
// the lowest feature then the lowest threshold.
struct OracleSplit {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

double sse(const std::vector<double>& y, const std::vector<int>& idx) {
  if (idx.empty()) return 0.0;
  double mean = 0.0;
  for (int i : idx) mean += y[i];
  mean /= idx.size();
  double acc = 0.0;
  for (int i : idx) acc += (y[i] - mean) * (y[i] - mean);
  return acc;
}

OracleSplit oracle_best_split(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y) {
  std::vector<int> all(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) all[i] = static_cast<int>(i);
  const double parent = sse(y, all);

  OracleSplit best;
  const int n_features = static_cast<int>(x.front().size());
  for (int f = 0; f < n_features; ++f) {
    std::vector<double> vals;
    for (const auto& row : x) vals.push_back(row[f]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double thr = 0.5 * (vals[k] + vals[k + 1]);
      std::vector<int> left, right;
      for (std::size_t i = 0; i < x.size(); ++i)
        (x[i][f] <= thr ? left : right).push_back(static_cast<int>(i));
      const double gain = parent - sse(y, left) - sse(y, right);
      if (gain > best.gain + 1e-12) {
        best = {true, f, thr, gain};
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("train/test split sizes and determinism") {
  SUBCASE("442 rows split 353/89") {
    const Dataset d = make_dataset(442, 1);
    auto [train, test] = train_test_split(d, 0.8, 7);
    CHECK(train.rows.size() == 353);
    CHECK(test.rows.size() == 89);
  }

  SUBCASE("10 rows split 8/2") {
    const Dataset d = make_dataset(10, 2);
    auto [train, test] = train_test_split(d, 0.8, 7);
    CHECK(train.rows.size() == 8);
    CHECK(test.rows.size() == 2);
  }

  SUBCASE("same seed, same partition; disjoint and exhaustive") {
    const Dataset d = make_dataset(50, 3);
    auto [a_train, a_test] = train_test_split(d, 0.8, 11);
    auto [b_train, b_test] = train_test_split(d, 0.8, 11);
    REQUIRE(a_train.rows.size() == b_train.rows.size());
    for (std::size_t i = 0; i < a_train.rows.size(); ++i)
      CHECK(a_train.rows[i].inlet_mm == b_train.rows[i].inlet_mm);

    std::multiset<double> keys, split_keys;
    for (const auto& r : d.rows) keys.insert(r.inlet_mm);
    for (const auto& r : a_train.rows) split_keys.insert(r.inlet_mm);
    for (const auto& r : a_test.rows) split_keys.insert(r.inlet_mm);
    CHECK(keys == split_keys);
  }
}

TEST_CASE("single tree fitting") {
  SUBCASE("constant residuals yield a single leaf") {
    const std::vector<std::vector<double>> x{{0.0}, {1.0}, {2.0}};
    const RegressionTree t = fit_tree(x, {5.0, 5.0, 5.0}, 3);
    CHECK(t.nodes.size() == 1);
    CHECK(t.predict(x[0]) == doctest::Approx(5.0));
  }

  SUBCASE("toy step function splits at the midpoint") {
    const std::vector<std::vector<double>> x{{0.0}, {1.0}, {2.0}, {3.0}};
    const std::vector<double> y{0.0, 0.0, 10.0, 10.0};
    const RegressionTree t = fit_tree(x, y, 1);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == doctest::Approx(1.5));
    CHECK(t.predict(x[1]) == doctest::Approx(0.0));
    CHECK(t.predict(x[2]) == doctest::Approx(10.0));
  }

  SUBCASE("depth-d tree fully separates 2^d distinct rows") {
    const std::vector<std::vector<double>> x{{0.0}, {1.0}, {2.0}, {3.0}};
    const std::vector<double> y{1.0, -2.0, 7.0, 4.0};
    const RegressionTree t = fit_tree(x, y, 2);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(t.predict(x[i]) == doctest::Approx(y[i]));
  }

  SUBCASE("root split matches the exhaustive oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 5 + static_cast<int>(rng() % 40);
      const int n_feat = 1 + static_cast<int>(rng() % 3);
      std::vector<std::vector<double>> x;
      std::vector<double> y;
      for (int i = 0; i < n; ++i) {
        std::vector<double> row;
        for (int f = 0; f < n_feat; ++f)
          row.push_back(static_cast<double>(rng() % 16));
        x.push_back(row);
        y.push_back(static_cast<double>(rng() % 100) / 10.0);
      }
      const OracleSplit oracle = oracle_best_split(x, y);
      const RegressionTree t = fit_tree(x, y, 3);
      if (!oracle.found) {
        CHECK(t.nodes[0].feature == -1);
      } else {
        REQUIRE(t.nodes[0].feature >= 0);
        CHECK(t.nodes[0].feature == oracle.feature);
        CHECK(t.nodes[0].threshold == doctest::Approx(oracle.threshold));
      }
    }
  }
}

TEST_CASE("gradient boosting") {
  SUBCASE("constant target predicts the constant") {
    Dataset d = make_dataset(20, 4);
    for (auto& r : d.rows) {
      r.inlet_mm = 3.25;
      r.total_mm = r.inlet_mm + r.outlet_mm;
    }
    const GradientBoostingModel m = fit_gbr(d, Target::Inlet, {0, 0.1, 3, 2});
    CHECK(m.trees.empty());
    CHECK(m.predict(d.rows[0].features) == doctest::Approx(3.25));
  }

  SUBCASE("training MSE is non-increasing per round") {
    Dataset d = make_dataset(60, 5);
    GbrParams params{30, 0.1, 3, 2};
    // replay boosting round by round through prefixes of the ensemble
    const GradientBoostingModel m = fit_gbr(d, Target::Total, params);
    double prev = 1e18;
    for (std::size_t rounds = 0; rounds <= m.trees.size(); ++rounds) {
      double mse = 0.0;
      for (const auto& r : d.rows) {
        double pred = m.init_value;
        for (std::size_t t = 0; t < rounds; ++t)
          pred += m.learning_rate * m.trees[t].predict(r.features);
        const double err = r.total_mm - pred;
        mse += err * err;
      }
      CHECK(mse <= prev + 1e-9);
      prev = mse;
    }
  }

  SUBCASE("fits a noiseless linear target well") {
    Dataset d;
    for (int i = 0; i < 20; ++i) {
      DataRow r;
      r.features = {static_cast<double>(i), 0.5};
      r.inlet_mm = 0.5 * i;  // range 0..9.5
      r.outlet_mm = 0.0;
      r.total_mm = r.inlet_mm;
      d.rows.push_back(r);
    }
    const GradientBoostingModel m = fit_gbr(d, Target::Inlet);
    std::vector<double> pred, truth;
    for (const auto& r : d.rows) {
      pred.push_back(m.predict(r.features));
      truth.push_back(r.inlet_mm);
    }
    CHECK(mae(pred, truth) < 0.05 * 9.5);
  }
}

TEST_CASE("prediction formula and determinism") {
  RegressionTree t;
  t.nodes = {{0, 1.5, 1, 2, 0.0}, {-1, 0.0, -1, -1, -3.0},
             {-1, 0.0, -1, -1, 8.0}};
  GradientBoostingModel m;
  m.init_value = 2.0;
  m.learning_rate = 0.1;

  const std::vector<double> x0{0.0}, x1{1.0}, x2{2.0};
  CHECK(m.predict(x0) == doctest::Approx(2.0));  // zero trees
  m.trees.push_back(t);
  CHECK(m.predict(x1) == doctest::Approx(2.0 + 0.1 * -3.0));
  CHECK(m.predict(x2) == doctest::Approx(2.0 + 0.1 * 8.0));
  CHECK(m.predict(x2) == m.predict(x2));
}

TEST_CASE("mae") {
  CHECK(mae(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}) ==
        doctest::Approx(0.0));
  CHECK(mae(std::vector<double>{2.0, 3.0}, std::vector<double>{1.0, 2.0}) ==
        doctest::Approx(1.0));
  CHECK(mae(std::vector<double>{0.0, 2.0}, std::vector<double>{1.0, 1.0}) ==
        doctest::Approx(1.0));
  CHECK_THROWS(mae(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("model JSON round trip preserves predictions") {
  Dataset d = make_dataset(40, 8);
  const GradientBoostingModel m = fit_gbr(d, Target::Outlet, {25, 0.1, 3, 2});
  const GradientBoostingModel back =
      GradientBoostingModel::from_json(m.to_json());
  for (const auto& r : d.rows)
    CHECK(back.predict(r.features) == m.predict(r.features));

  nlohmann::json bad = m.to_json();
  bad["format_version"] = 99;
  CHECK_THROWS(GradientBoostingModel::from_json(bad));
}

TEST_CASE("dataset CSV round trip") {
  Dataset d = make_dataset(12, 9);
  for (auto& r : d.rows) {
    r.sensor = "p31";
    r.repetition = 1;
    r.seed = 123456789ULL;
  }
  const char* path = "test_dataset.csv";
  write_csv(path, d);
  const Dataset back = read_dataset_csv(path);
  std::remove(path);
  REQUIRE(back.rows.size() == d.rows.size());
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    CHECK(back.rows[i].inlet_mm ==
          doctest::Approx(d.rows[i].inlet_mm).epsilon(1e-9));
    CHECK(back.rows[i].sensor == d.rows[i].sensor);
    CHECK(back.rows[i].seed == d.rows[i].seed);
    for (std::size_t f = 0; f < d.rows[i].features.size(); ++f)
      CHECK(back.rows[i].features[f] ==
            doctest::Approx(d.rows[i].features[f]).epsilon(1e-9));
  }
}

TEST_CASE("dataset validation rejects broken targets") {
  Dataset d = make_dataset(3, 10);
  d.rows[1].total_mm += 0.5;
  CHECK_THROWS(d.validate());
}
