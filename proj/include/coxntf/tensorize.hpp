#pragma once

#include <Eigen/Dense>

#include "coxntf/factor.hpp"
#include "coxntf/types.hpp"

namespace coxntf {

// Hard-assignment event tensor: each event sample's covariate row, scaled by
// the square root of its IPCW weight, lands in the period containing its
// event time. Censored samples contribute nothing.
Tensor3 build_event_tensor(const SurvivalDataset& data, const TimeGrid& grid,
                           const Eigen::VectorXd& ipcw);

// Probability-weighted tensor: every sample's covariate row appears in every
// period, scaled by the square root of the period event probability. Requires
// probabilities: n x q, entries in [0, 1].
Tensor3 build_probability_tensor(const Eigen::MatrixXd& X, const TimeGrid& grid,
                                 const Eigen::MatrixXd& probabilities);
Tensor3 build_probability_tensor(const SurvivalDataset& data, const TimeGrid& grid,
                                 const Eigen::MatrixXd& probabilities);

}  // namespace coxntf
