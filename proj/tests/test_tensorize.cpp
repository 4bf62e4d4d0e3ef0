#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "coxntf/surv.hpp"
#include "coxntf/tensorize.hpp"
#include "oracles.hpp"

using namespace coxntf;

namespace {

TimeGrid grid_03inf() {
  return TimeGrid({0.0, 3.0, std::numeric_limits<double>::infinity()});
}

SurvivalDataset tiny_dataset() {
  SurvivalDataset ds;
  ds.X.resize(2, 2);
  ds.X << 1, 2, 3, 4;
  ds.time.resize(2);
  ds.time << 1, 5;
  ds.event.resize(2);
  ds.event << 1, 0;
  return ds;
}

SurvivalDataset random_dataset(std::mt19937_64& rng, int n, int p) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> tdist(1, 12);
  SurvivalDataset ds;
  ds.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) ds.X(i, j) = unif(rng);
  ds.time.resize(n);
  ds.event.resize(n);
  int events = 0;
  for (int i = 0; i < n; ++i) {
    ds.time(i) = tdist(rng);
    ds.event(i) = unif(rng) < 0.5 ? 1 : 0;
    events += ds.event(i);
  }
  if (events == 0) ds.event(0) = 1;
  return ds;
}

}  // namespace

TEST_CASE("event tensor: hand-worked two-sample example") {
  const SurvivalDataset ds = tiny_dataset();
  const TimeGrid grid = grid_03inf();
  const Eigen::VectorXd w = ipcw_weights(ds.time, ds.event);
  const Tensor3 t = build_event_tensor(ds, grid, w);

  CHECK(t.at(0, 0, 0) == 1.0);
  CHECK(t.at(0, 1, 0) == 2.0);
  double other_mass = 0.0;
  for (Eigen::Index k = 0; k < t.n_periods(); ++k)
    other_mass += t.slice(k).cwiseAbs().sum();
  CHECK(other_mass == 3.0);  // only the (0, :, 0) slice is nonzero
}

TEST_CASE("event tensor: all-censored data gives the zero tensor") {
  SurvivalDataset ds = tiny_dataset();
  ds.event << 0, 0;
  const Tensor3 t = build_event_tensor(ds, grid_03inf(), Eigen::VectorXd::Zero(2));
  CHECK(t.squared_norm() == 0.0);
}

TEST_CASE("event tensor: no censoring copies rows exactly") {
  std::mt19937_64 rng(3);
  SurvivalDataset ds = random_dataset(rng, 8, 4);
  ds.event.setOnes();
  const TimeGrid grid = time_grid_from_percentiles(ds.time, {50.0});
  const Eigen::VectorXd w = ipcw_weights(ds.time, ds.event);
  const Tensor3 t = build_event_tensor(ds, grid, w);
  for (int i = 0; i < 8; ++i) {
    const int k = grid.period_of(ds.time(i));
    for (int j = 0; j < 4; ++j) CHECK(t.at(i, j, k) == ds.X(i, j));
  }
}

TEST_CASE("event tensor: boundary times belong to the earlier period") {
  SurvivalDataset ds = tiny_dataset();
  ds.time << 3, 4;  // exactly on the boundary / just after
  ds.event << 1, 1;
  const TimeGrid grid = grid_03inf();
  const Tensor3 t = build_event_tensor(ds, grid, ipcw_weights(ds.time, ds.event));
  CHECK(t.at(0, 0, 0) != 0.0);  // t=3 in (0,3]
  CHECK(t.at(1, 0, 1) != 0.0);  // t=4 in (3,inf)
  CHECK(t.at(1, 0, 0) == 0.0);
}

TEST_CASE("probability tensor: hard assignment and zero cases") {
  Eigen::MatrixXd x(1, 2);
  x << 2, 0;
  const TimeGrid grid = grid_03inf();

  Eigen::MatrixXd p_hard(1, 2);
  p_hard << 1, 0;
  const Tensor3 hard = build_probability_tensor(x, grid, p_hard);
  CHECK(hard.at(0, 0, 0) == 2.0);
  CHECK(hard.at(0, 0, 1) == 0.0);

  const Tensor3 zero = build_probability_tensor(x, grid, Eigen::MatrixXd::Zero(1, 2));
  CHECK(zero.squared_norm() == 0.0);

  Eigen::MatrixXd p(1, 2);
  p << 0.25, 0.75;
  const Tensor3 t = build_probability_tensor(x, grid, p);
  CHECK(t.at(0, 0, 0) == doctest::Approx(1.0));
  CHECK(t.at(0, 0, 1) == doctest::Approx(std::sqrt(0.75) * 2.0));
  CHECK(t.at(0, 1, 0) == 0.0);
  CHECK(t.at(0, 1, 1) == 0.0);
}

TEST_CASE("probability tensor: negative probabilities rejected") {
  Eigen::MatrixXd x(1, 1);
  x << 1;
  Eigen::MatrixXd p(1, 2);
  p << -0.1, 0.5;
  CHECK_THROWS_AS(build_probability_tensor(x, grid_03inf(), p), NumericalError);
}

TEST_CASE("event tensor matches the pseudocode transcription exactly") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const SurvivalDataset ds = random_dataset(rng, n, 1 + static_cast<int>(rng() % 4));
    const TimeGrid grid = time_grid_from_percentiles(
        Eigen::VectorXd::LinSpaced(13, 1.0, 13.0), {25.0, 50.0, 75.0});
    const Eigen::VectorXd w = ipcw_weights(ds.time, ds.event);

    const Tensor3 mine = build_event_tensor(ds, grid, w);
    const Tensor3 ref = oracle::event_tensor_transcription(ds, grid, w);
    for (Eigen::Index k = 0; k < mine.n_periods(); ++k)
      CHECK(mine.slice(k) == ref.slice(k));
  }
}

TEST_CASE("probability tensor matches the pseudocode transcription exactly") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    const int p = 1 + static_cast<int>(rng() % 4);
    const SurvivalDataset ds = random_dataset(rng, n, p);
    const TimeGrid grid = time_grid_from_percentiles(
        Eigen::VectorXd::LinSpaced(13, 1.0, 13.0), {25.0, 50.0, 75.0});
    Eigen::MatrixXd prob(n, grid.n_periods());
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < grid.n_periods(); ++k) prob(i, k) = unif(rng);

    const Tensor3 mine = build_probability_tensor(ds, grid, prob);
    const Tensor3 ref = oracle::probability_tensor_transcription(ds.X, grid, prob);
    for (Eigen::Index k = 0; k < mine.n_periods(); ++k)
      CHECK(mine.slice(k) == ref.slice(k));
  }
}

TEST_CASE("tensor invariants: one nonzero slice per event, Frobenius mass") {
  std::mt19937_64 rng(11);
  const SurvivalDataset ds = random_dataset(rng, 12, 5);
  const TimeGrid grid = time_grid_from_percentiles(ds.time, {30.0, 60.0});
  const Eigen::VectorXd w = ipcw_weights(ds.time, ds.event);
  const Tensor3 ev = build_event_tensor(ds, grid, w);

  for (int i = 0; i < 12; ++i) {
    int nonzero_slices = 0;
    for (Eigen::Index k = 0; k < ev.n_periods(); ++k)
      if (ev.slice(k).row(i).cwiseAbs().sum() > 0.0) ++nonzero_slices;
    if (ds.event(i) == 1 && ds.X.row(i).cwiseAbs().sum() > 0.0)
      CHECK(nonzero_slices == 1);
    if (ds.event(i) == 0) CHECK(nonzero_slices == 0);
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd prob(12, grid.n_periods());
  for (int i = 0; i < 12; ++i)
    for (int k = 0; k < grid.n_periods(); ++k) prob(i, k) = unif(rng);
  const Tensor3 pt = build_probability_tensor(ds, grid, prob);
  for (int i = 0; i < 12; ++i) {
    double slab = 0.0;
    for (Eigen::Index k = 0; k < pt.n_periods(); ++k)
      slab += pt.slice(k).row(i).squaredNorm();
    CHECK(slab == doctest::Approx(ds.X.row(i).squaredNorm() * prob.row(i).sum()));
  }
}
