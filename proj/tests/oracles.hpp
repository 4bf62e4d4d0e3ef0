// Independent brute-force reference implementations used only by tests.
// These stay deliberately naive (direct definitions, quadratic loops) and
// must not share code with the library paths they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "coxntf/factor.hpp"
#include "coxntf/types.hpp"

namespace oracle {

// Survival curve as explicit (time, value) points; value before the first
// point is 1.
struct Curve {
  std::vector<std::pair<double, double>> points;

  double at(double t) const {  // right-continuous evaluation
    double v = 1.0;
    for (const auto& [u, s] : points) {
      if (u > t) break;
      v = s;
    }
    return v;
  }
  double before(double t) const {  // left limit
    double v = 1.0;
    for (const auto& [u, s] : points) {
      if (u >= t) break;
      v = s;
    }
    return v;
  }
  double smallest_positive() const {
    double sp = 1.0;
    for (const auto& [u, s] : points)
      if (s > 0.0) sp = std::min(sp, s);
    return sp;
  }
};

inline Curve kaplan_meier(const Eigen::VectorXd& time, const Eigen::VectorXi& event) {
  std::map<double, std::pair<long, long>> groups;  // time -> (deaths, total)
  for (Eigen::Index i = 0; i < time.size(); ++i) {
    auto& g = groups[time(i)];
    if (event(i) == 1) ++g.first;
    ++g.second;
  }
  Curve curve;
  double surv = 1.0;
  double at_risk = static_cast<double>(time.size());
  for (const auto& [t, g] : groups) {
    if (g.first > 0) {
      surv *= 1.0 - static_cast<double>(g.first) / at_risk;
      curve.points.emplace_back(t, surv);
    }
    at_risk -= static_cast<double>(g.second);
  }
  return curve;
}

inline Eigen::VectorXd ipcw_weights(const Eigen::VectorXd& time,
                                    const Eigen::VectorXi& event) {
  Eigen::VectorXi flipped(event.size());
  for (Eigen::Index i = 0; i < event.size(); ++i) flipped(i) = 1 - event(i);
  const Curve g = kaplan_meier(time, flipped);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(time.size());
  for (Eigen::Index i = 0; i < time.size(); ++i) {
    if (event(i) != 1) continue;
    double gv = g.before(time(i));
    if (gv <= 0.0) gv = g.smallest_positive();
    w(i) = 1.0 / gv;
  }
  return w;
}

inline double harrell_cindex(const Eigen::VectorXd& time, const Eigen::VectorXi& event,
                             const Eigen::VectorXd& risk) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < time.size(); ++i)
    for (Eigen::Index j = 0; j < time.size(); ++j) {
      if (event(i) != 1 || !(time(i) < time(j))) continue;
      den += 1.0;
      if (risk(i) > risk(j))
        num += 1.0;
      else if (risk(i) == risk(j))
        num += 0.5;
    }
  return num / den;
}

inline double uno_cindex(const Eigen::VectorXd& time_train,
                         const Eigen::VectorXi& event_train,
                         const Eigen::VectorXd& time_test,
                         const Eigen::VectorXi& event_test,
                         const Eigen::VectorXd& risk_test, double tau) {
  Eigen::VectorXi flipped(event_train.size());
  for (Eigen::Index i = 0; i < event_train.size(); ++i)
    flipped(i) = 1 - event_train(i);
  const Curve g = kaplan_meier(time_train, flipped);

  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < time_test.size(); ++i) {
    if (event_test(i) != 1 || time_test(i) > tau) continue;
    double gv = g.at(time_test(i));
    if (gv <= 0.0) gv = g.smallest_positive();
    const double w = 1.0 / (gv * gv);
    for (Eigen::Index j = 0; j < time_test.size(); ++j) {
      if (!(time_test(i) < time_test(j))) continue;
      den += w;
      if (risk_test(i) > risk_test(j))
        num += w;
      else if (risk_test(i) == risk_test(j))
        num += 0.5 * w;
    }
  }
  return num / den;
}

// Breslow partial log-likelihood from its definition, with O(n^2) risk sums.
inline double partial_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                             const Eigen::VectorXi& event, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = X * beta;
  std::map<double, std::vector<Eigen::Index>> event_groups;
  for (Eigen::Index i = 0; i < time.size(); ++i)
    if (event(i) == 1) event_groups[time(i)].push_back(i);
  double ll = 0.0;
  for (const auto& [u, members] : event_groups) {
    double risk_sum = 0.0;
    for (Eigen::Index j = 0; j < time.size(); ++j)
      if (time(j) >= u) risk_sum += std::exp(eta(j));
    for (Eigen::Index i : members) ll += eta(i);
    ll -= static_cast<double>(members.size()) * std::log(risk_sum);
  }
  return ll;
}

inline double penalized_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                                  const Eigen::VectorXi& event,
                                  const Eigen::VectorXd& beta, double lambda,
                                  double l1_ratio) {
  const double n = static_cast<double>(X.rows());
  double pen = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    pen += l1_ratio * std::abs(beta(j)) + 0.5 * (1.0 - l1_ratio) * beta(j) * beta(j);
  return -partial_loglik(X, time, event, beta) / n + lambda * pen;
}

// Exhaustive 1-D minimizer of the penalized objective over [-5, 5].
inline double grid_search_1d(const Eigen::MatrixXd& X, const Eigen::VectorXd& time,
                             const Eigen::VectorXi& event, double lambda,
                             double l1_ratio, double step = 1e-4) {
  double best_b = 0.0, best_obj = std::numeric_limits<double>::infinity();
  Eigen::VectorXd beta(1);
  for (double b = -5.0; b <= 5.0 + step / 2; b += step) {
    beta(0) = b;
    const double obj = penalized_objective(X, time, event, beta, lambda, l1_ratio);
    if (obj < best_obj) {
      best_obj = obj;
      best_b = b;
    }
  }
  return best_b;
}

// Coarse-to-fine 2-D minimizer; refinement around the incumbent is safe
// because the objective is convex in beta.
inline Eigen::Vector2d grid_search_2d(const Eigen::MatrixXd& X,
                                      const Eigen::VectorXd& time,
                                      const Eigen::VectorXi& event, double lambda,
                                      double l1_ratio) {
  Eigen::Vector2d center(0.0, 0.0);
  double half = 5.0;
  double step = 0.1;
  for (int level = 0; level < 4; ++level) {
    Eigen::Vector2d best = center;
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta(2);
    for (double b0 = center(0) - half; b0 <= center(0) + half + step / 2; b0 += step)
      for (double b1 = center(1) - half; b1 <= center(1) + half + step / 2;
           b1 += step) {
        beta << b0, b1;
        const double obj = penalized_objective(X, time, event, beta, lambda, l1_ratio);
        if (obj < best_obj) {
          best_obj = obj;
          best = beta;
        }
      }
    center = best;
    half = 2.0 * step;
    step = step / 25.0;
  }
  return center;
}

// Literal transcriptions of the two tensor-construction procedures.
inline coxntf::Tensor3 event_tensor_transcription(const coxntf::SurvivalDataset& data,
                                                  const coxntf::TimeGrid& grid,
                                                  const Eigen::VectorXd& ipcw) {
  const Eigen::Index n = data.n_samples(), p = data.n_features();
  const auto& s = grid.boundaries();
  const int q = grid.n_periods();
  coxntf::Tensor3 x(n, p, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.event(i) == 1) {
      for (int k = 1; k <= q; ++k) {
        if (s[static_cast<std::size_t>(k - 1)] < data.time(i) &&
            data.time(i) <= s[static_cast<std::size_t>(k)]) {
          for (Eigen::Index j = 0; j < p; ++j) x.at(i, j, k - 1) = data.X(i, j);
        }
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < q; ++k)
      for (Eigen::Index j = 0; j < p; ++j) x.at(i, j, k) *= std::sqrt(ipcw(i));
  return x;
}

inline coxntf::Tensor3 probability_tensor_transcription(const Eigen::MatrixXd& X,
                                                        const coxntf::TimeGrid& grid,
                                                        const Eigen::MatrixXd& prob) {
  const Eigen::Index n = X.rows(), p = X.cols();
  const int q = grid.n_periods();
  coxntf::Tensor3 x(n, p, q);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < q; ++k)
      for (Eigen::Index j = 0; j < p; ++j)
        x.at(i, j, k) = std::sqrt(prob(i, k)) * X(i, j);
  return x;
}

// Random right-censored instances for property tests. Times come from a
// small integer grid so ties occur; about `censor_frac` rows are censored.
struct RandomSurvival {
  Eigen::VectorXd time;
  Eigen::VectorXi event;
  Eigen::VectorXd risk;
};

inline RandomSurvival random_survival(std::mt19937_64& rng, int n,
                                      double censor_frac = 0.4,
                                      bool integer_times = true) {
  std::uniform_int_distribution<int> tdist(1, 20);
  std::uniform_real_distribution<double> udist(0.0, 1.0);
  RandomSurvival out;
  out.time.resize(n);
  out.event.resize(n);
  out.risk.resize(n);
  int events = 0;
  for (int i = 0; i < n; ++i) {
    out.time(i) = integer_times ? static_cast<double>(tdist(rng))
                                : 0.25 + 20.0 * udist(rng);
    out.event(i) = udist(rng) < censor_frac ? 0 : 1;
    if (out.event(i) == 1) ++events;
    // quantized risks so ties happen
    out.risk(i) = std::floor(udist(rng) * 8.0) / 4.0;
  }
  if (events == 0) out.event(static_cast<Eigen::Index>(n / 2)) = 1;
  return out;
}

}  // namespace oracle
