#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "coxntf/surv.hpp"
#include "coxntf/types.hpp"

namespace coxntf {

struct CoxnetOptions {
  double l1_ratio = 0.5;          // elastic-net mixing, in (0, 1]
  int path_length = 100;
  double lambda_min_ratio = 0.0;  // 0 = auto (0.01 if n > p, else 0.05)
  double tol = 1e-7;              // max |coefficient change| per sweep
  int max_sweeps = 100000;        // coordinate sweeps per path point
  std::vector<double> lambda_path;  // optional explicit path (decreasing)
};

// Elastic-net Cox proportional-hazards model with a Breslow baseline.
struct CoxnetModel {
  Eigen::VectorXd beta;
  double l1_ratio = 0.5;
  double lambda = 0.0;              // penalty at which beta was selected
  std::vector<double> lambda_path;  // decreasing
  StepFunction baseline_cum_hazard;  // H0(t), nondecreasing, H0(0) = 0
  std::vector<std::string> feature_names;
  Scaler scaler;  // preprocessing metadata, empty when inputs were not tabular
  bool converged = true;
};

// Cyclic coordinate descent over a geometric lambda path with warm starts.
// When a validation set is given, the returned lambda maximizes Harrell's
// c-index on it; otherwise the path midpoint (by index) is used.
CoxnetModel coxnet_fit(const SurvivalDataset& data, const CoxnetOptions& opts = {},
                       const SurvivalDataset* validation = nullptr,
                       Warnings* warnings = nullptr);

// Linear predictor eta = X beta.
Eigen::VectorXd predict_risk(const CoxnetModel& model, const Eigen::MatrixXd& X);

// S(u | x) = exp(-H0(u) * exp(eta)); H0 is constant beyond its last knot.
double survival_probability(const CoxnetModel& model, const Eigen::VectorXd& x,
                            double u);

// Probability that the event falls in each grid period:
// P(x, k) = S(s(k-1) | x) - S(s(k) | x), with S at +inf taken at the last
// baseline knot. Entries are nonnegative and sum to 1 - S(t_max | x).
Eigen::VectorXd period_event_probability(const CoxnetModel& model,
                                         const Eigen::VectorXd& x,
                                         const TimeGrid& grid);
Eigen::MatrixXd period_event_probability(const CoxnetModel& model,
                                         const Eigen::MatrixXd& X,
                                         const TimeGrid& grid);

int n_selected_features(const CoxnetModel& model);

// Penalized Breslow partial log-likelihood machinery, exposed for the path
// solver and for tests: value = pll(beta)/n - lambda * penalty(beta).
double breslow_partial_loglik(const SurvivalDataset& data, const Eigen::VectorXd& eta);
double smallest_all_zero_lambda(const SurvivalDataset& data, double l1_ratio);

}  // namespace coxntf
