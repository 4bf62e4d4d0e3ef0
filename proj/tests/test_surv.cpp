#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "coxntf/surv.hpp"
#include "oracles.hpp"

using namespace coxntf;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXi ivec(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("kaplan_meier: all events") {
  const auto s = kaplan_meier(vec({2, 4, 6}), ivec({1, 1, 1}));
  CHECK(s(1.9) == doctest::Approx(1.0));
  CHECK(s(2) == doctest::Approx(2.0 / 3.0));
  CHECK(s(4) == doctest::Approx(1.0 / 3.0));
  CHECK(s(6) == doctest::Approx(0.0));
  CHECK(s(100) == doctest::Approx(0.0));
}

TEST_CASE("kaplan_meier: censored middle observation") {
  const auto s = kaplan_meier(vec({2, 4, 6}), ivec({1, 0, 1}));
  CHECK(s(2) == doctest::Approx(2.0 / 3.0));
  CHECK(s(4) == doctest::Approx(2.0 / 3.0));
  CHECK(s(5.99) == doctest::Approx(2.0 / 3.0));
  CHECK(s(6) == doctest::Approx(0.0));
}

TEST_CASE("kaplan_meier: no events gives constant 1") {
  const auto s = kaplan_meier(vec({1, 2, 3}), ivec({0, 0, 0}));
  CHECK(s(0.5) == 1.0);
  CHECK(s(10) == 1.0);
  CHECK(s.knots().empty());
}

TEST_CASE("kaplan_meier: empty input rejected") {
  CHECK_THROWS_AS(kaplan_meier(Eigen::VectorXd(), Eigen::VectorXi()), NumericalError);
}

TEST_CASE("kaplan_meier: tied times keep censored rows at risk") {
  // at t=3: 2 deaths, 1 censored, 4 at risk -> S = 1/2
  const auto s = kaplan_meier(vec({3, 3, 3, 5}), ivec({1, 1, 0, 1}));
  CHECK(s(3) == doctest::Approx(0.5));
  CHECK(s(5) == doctest::Approx(0.0));
}

TEST_CASE("ipcw: no censoring gives unit weights") {
  const auto w = ipcw_weights(vec({1, 2, 3, 4}), ivec({1, 1, 1, 1}));
  for (int i = 0; i < 4; ++i) CHECK(w(i) == 1.0);
}

TEST_CASE("ipcw: hand-computed censoring curve") {
  // censoring KM: censor event at t=4 with 2 at risk -> G = 1/2 after 4
  const auto w = ipcw_weights(vec({2, 4, 6}), ivec({1, 0, 1}));
  CHECK(w(0) == doctest::Approx(1.0));
  CHECK(w(1) == 0.0);
  CHECK(w(2) == doctest::Approx(2.0));
}

TEST_CASE("ipcw: single event") {
  const auto w = ipcw_weights(vec({5}), ivec({1}));
  CHECK(w.size() == 1);
  CHECK(w(0) == 1.0);
}

TEST_CASE("ipcw: heavy censoring keeps weights finite") {
  // The left limit G(t-) stays positive because the event row itself is at
  // risk at every earlier censoring time; no clamp is needed here.
  Warnings warnings;
  const auto w = ipcw_weights(vec({1, 2, 3, 10}), ivec({0, 0, 0, 1}), &warnings);
  CHECK(w(3) == doctest::Approx(4.0));
  CHECK(std::isfinite(w(3)));
  CHECK(warnings.empty());
}

TEST_CASE("uno: clamps when the censoring curve reaches zero at an event time") {
  // training censoring curve hits 0 at t=3; a test event at t=3 needs the clamp
  Warnings warnings;
  const double ci =
      uno_cindex(vec({1, 2, 3}), ivec({1, 1, 0}), vec({3, 4}), ivec({1, 0}),
                 vec({2, 1}), std::numeric_limits<double>::quiet_NaN(), &warnings);
  CHECK(ci == 1.0);
  CHECK(!warnings.empty());
}

TEST_CASE("time grid: percentiles of 1..100") {
  Eigen::VectorXd t(100);
  for (int i = 0; i < 100; ++i) t(i) = i + 1;
  const TimeGrid grid = time_grid_from_percentiles(t);
  CHECK(grid.n_periods() == 6);
  const auto interior = grid.interior();
  REQUIRE(interior.size() == 5);
  CHECK(interior[0] == doctest::Approx(10.9));
  CHECK(interior[1] == doctest::Approx(25.75));
  CHECK(interior[2] == doctest::Approx(50.5));
  CHECK(interior[3] == doctest::Approx(75.25));
  CHECK(interior[4] == doctest::Approx(90.1));
}

TEST_CASE("time grid: midpoint interpolation") {
  const TimeGrid grid = time_grid_from_percentiles(vec({1, 3}), {50.0});
  CHECK(grid.n_periods() == 2);
  CHECK(grid.interior()[0] == doctest::Approx(2.0));
}

TEST_CASE("time grid: degenerate distribution rejected") {
  CHECK_THROWS_AS(time_grid_from_percentiles(vec({5, 5, 5, 5}), {25.0, 50.0}),
                  NumericalError);
}

TEST_CASE("time grid: duplicate boundaries collapse with warning") {
  Warnings warnings;
  const TimeGrid grid =
      time_grid_from_percentiles(vec({1, 2, 2, 2, 2, 2, 2, 9}),
                                 {25.0, 50.0, 75.0}, &warnings);
  CHECK(!warnings.empty());
  const auto& b = grid.boundaries();
  for (std::size_t k = 1; k < b.size(); ++k) CHECK(b[k - 1] < b[k]);
}

TEST_CASE("time grid: every finite time maps to exactly one period") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto data = oracle::random_survival(rng, 40);
    const TimeGrid grid = time_grid_from_percentiles(data.time);
    const auto& s = grid.boundaries();
    for (Eigen::Index i = 0; i < data.time.size(); ++i) {
      const int k = grid.period_of(data.time(i));
      REQUIRE(k >= 0);
      REQUIRE(k < grid.n_periods());
      CHECK(s[static_cast<std::size_t>(k)] < data.time(i));
      CHECK(data.time(i) <= s[static_cast<std::size_t>(k) + 1]);
    }
  }
}

TEST_CASE("harrell: perfect concordance and anti-concordance") {
  CHECK(harrell_cindex(vec({1, 2, 3}), ivec({1, 1, 1}), vec({3, 2, 1})) == 1.0);
  CHECK(harrell_cindex(vec({1, 2, 3}), ivec({1, 1, 1}), vec({1, 2, 3})) == 0.0);
  CHECK(harrell_cindex(vec({1, 2, 3}), ivec({1, 1, 1}), vec({2, 2, 2})) == 0.5);
}

TEST_CASE("harrell: no comparable pairs rejected") {
  CHECK_THROWS_AS(harrell_cindex(vec({1, 1}), ivec({1, 1}), vec({1, 2})),
                  NumericalError);
  CHECK_THROWS_AS(harrell_cindex(vec({1, 2}), ivec({0, 0}), vec({1, 2})),
                  NumericalError);
}

TEST_CASE("uno equals harrell when training is uncensored") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto train = oracle::random_survival(rng, 30, 0.0);
    train.event.setOnes();
    const auto test = oracle::random_survival(rng, 25, 0.35);
    if (test.event.sum() == 0) continue;
    const double uno = uno_cindex(train.time, train.event, test.time, test.event,
                                  test.risk);
    const double harrell = harrell_cindex(test.time, test.event, test.risk);
    CHECK(uno == harrell);
  }
}

TEST_CASE("c-index rank invariance under increasing transforms") {
  std::mt19937_64 rng(13);
  const auto train = oracle::random_survival(rng, 40, 0.3);
  const auto test = oracle::random_survival(rng, 30, 0.3);
  Eigen::VectorXd transformed(test.risk.size());
  for (Eigen::Index i = 0; i < test.risk.size(); ++i)
    transformed(i) = std::exp(2.0 * test.risk(i)) + 5.0;
  CHECK(harrell_cindex(test.time, test.event, test.risk) ==
        harrell_cindex(test.time, test.event, transformed));
  CHECK(uno_cindex(train.time, train.event, test.time, test.event, test.risk) ==
        uno_cindex(train.time, train.event, test.time, test.event, transformed));
}

TEST_CASE("oracle equivalence on random instances") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const bool integer_times = trial % 2 == 0;
    const int n = 5 + static_cast<int>(rng() % 56);
    const auto data = oracle::random_survival(rng, n, 0.4, integer_times);

    // Kaplan-Meier against the brute-force product
    const auto mine = kaplan_meier(data.time, data.event);
    const auto ref = oracle::kaplan_meier(data.time, data.event);
    for (double u : {0.5, 1.0, 3.0, 7.5, 12.0, 20.0, 25.0}) {
      CHECK(mine(u) == ref.at(u));
      CHECK(mine.left_limit(u) == ref.before(u));
    }

    const Eigen::VectorXd w_mine = ipcw_weights(data.time, data.event);
    const Eigen::VectorXd w_ref = oracle::ipcw_weights(data.time, data.event);
    for (Eigen::Index i = 0; i < w_mine.size(); ++i) CHECK(w_mine(i) == w_ref(i));

    bool comparable = false;
    for (Eigen::Index i = 0; i < data.time.size() && !comparable; ++i)
      for (Eigen::Index j = 0; j < data.time.size() && !comparable; ++j)
        if (data.event(i) == 1 && data.time(i) < data.time(j)) comparable = true;
    if (!comparable) continue;

    CHECK(harrell_cindex(data.time, data.event, data.risk) ==
          oracle::harrell_cindex(data.time, data.event, data.risk));

    const auto train = oracle::random_survival(rng, n, 0.5, integer_times);
    double tau = -1;
    for (Eigen::Index i = 0; i < data.time.size(); ++i)
      if (data.event(i) == 1) tau = std::max(tau, data.time(i));
    CHECK(uno_cindex(train.time, train.event, data.time, data.event, data.risk) ==
          oracle::uno_cindex(train.time, train.event, data.time, data.event,
                             data.risk, tau));
  }
}

TEST_CASE("kaplan-meier properties on random inputs") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    const auto data = oracle::random_survival(rng, 30, 0.5);
    const auto s = kaplan_meier(data.time, data.event);
    double prev = 1.0;
    for (double v : s.values()) {
      CHECK(v <= prev + 1e-15);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      prev = v;
    }
    // weights are >= 1 for events unless clamped
    const auto w = ipcw_weights(data.time, data.event);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (data.event(i) == 1)
        CHECK(w(i) >= 1.0);
      else
        CHECK(w(i) == 0.0);
    }
  }
}

TEST_CASE("preprocess: dummy coding and min-max scaling") {
  RawTable table;
  table.column_names = {"time", "event", "group", "value"};
  table.columns = {{"1", "2", "3"}, {"1", "0", "1"}, {"A", "B", "A"}, {"2", "4", "6"}};
  const auto res = preprocess(table);
  REQUIRE(res.dataset.n_features() == 3);
  CHECK(res.dataset.feature_names ==
        std::vector<std::string>{"group=A", "group=B", "value"});
  CHECK(res.dataset.X(0, 0) == 1.0);
  CHECK(res.dataset.X(0, 1) == 0.0);
  CHECK(res.dataset.X(1, 0) == 0.0);
  CHECK(res.dataset.X(1, 1) == 1.0);
  CHECK(res.dataset.X(2, 0) == 1.0);
  CHECK(res.dataset.X(0, 2) == doctest::Approx(0.0));
  CHECK(res.dataset.X(1, 2) == doctest::Approx(0.5));
  CHECK(res.dataset.X(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("preprocess: invalid time and event rejected") {
  RawTable table;
  table.column_names = {"time", "event", "x"};
  table.columns = {{"1", "-2"}, {"1", "0"}, {"0.5", "0.7"}};
  CHECK_THROWS_AS(preprocess(table), SchemaError);

  table.columns = {{"1", "2"}, {"1", "2"}, {"0.5", "0.7"}};
  CHECK_THROWS_AS(preprocess(table), SchemaError);
}

TEST_CASE("preprocess: constant column scaled to zeros with warning") {
  RawTable table;
  table.column_names = {"time", "event", "x"};
  table.columns = {{"1", "2", "3"}, {"1", "0", "1"}, {"7", "7", "7"}};
  const auto res = preprocess(table);
  CHECK(res.dataset.X.col(0).maxCoeff() == 0.0);
  CHECK(!res.warnings.empty());
}

TEST_CASE("preprocess: missing columns error") {
  RawTable table;
  table.column_names = {"when", "event", "x"};
  table.columns = {{"1"}, {"1"}, {"2"}};
  CHECK_THROWS_AS(preprocess(table), SchemaError);
}

TEST_CASE("scaler: held-out transform matches fit-time encoding") {
  RawTable train;
  train.column_names = {"time", "event", "grp", "v"};
  train.columns = {{"1", "2", "3"}, {"1", "0", "1"}, {"A", "B", "A"}, {"2", "4", "6"}};
  const auto res = preprocess(train);

  RawTable held;
  held.column_names = {"grp", "v"};  // no survival columns needed
  held.columns = {{"B", "C"}, {"4", "8"}};
  Warnings warnings;
  const Eigen::MatrixXd X = res.scaler.transform_features(held, &warnings);
  CHECK(X(0, 0) == 0.0);  // grp=A
  CHECK(X(0, 1) == 1.0);  // grp=B
  CHECK(X(0, 2) == doctest::Approx(0.5));
  // unseen level "C" encodes as zeros, out-of-range value clamps to [0,1]
  CHECK(X(1, 0) == 0.0);
  CHECK(X(1, 1) == 0.0);
  CHECK(X(1, 2) == 1.0);
  CHECK(!warnings.empty());
}

TEST_CASE("scaler: unknown feature column rejected") {
  RawTable train;
  train.column_names = {"time", "event", "v"};
  train.columns = {{"1", "2"}, {"1", "0"}, {"2", "4"}};
  const auto res = preprocess(train);

  RawTable held;
  held.column_names = {"v", "extra"};
  held.columns = {{"3"}, {"1"}};
  CHECK_THROWS_AS(res.scaler.transform_features(held), SchemaError);
}

TEST_CASE("step function evaluation semantics") {
  const StepFunction f({1.0, 3.0}, {0.5, 0.25}, 1.0);
  CHECK(f(0.5) == 1.0);
  CHECK(f(1.0) == 0.5);       // right continuous
  CHECK(f.left_limit(1.0) == 1.0);
  CHECK(f(2.9) == 0.5);
  CHECK(f(3.0) == 0.25);
  CHECK(f.left_limit(3.0) == 0.5);
  CHECK(f(100.0) == 0.25);
  CHECK(f(std::numeric_limits<double>::infinity()) == 0.25);
}
