#include "coxntf/tensorize.hpp"

#include <cmath>

namespace coxntf {

Tensor3 build_event_tensor(const SurvivalDataset& data, const TimeGrid& grid,
                           const Eigen::VectorXd& ipcw) {
  const Eigen::Index n = data.n_samples(), p = data.n_features();
  if (ipcw.size() != n)
    throw NumericalError("build_event_tensor: weight vector length mismatch");
  Tensor3 tensor(n, p, grid.n_periods());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.event(i) != 1) continue;
    const int k = grid.period_of(data.time(i));
    tensor.slice(k).row(i) = data.X.row(i) * std::sqrt(ipcw(i));
  }
  return tensor;
}

Tensor3 build_probability_tensor(const Eigen::MatrixXd& X, const TimeGrid& grid,
                                 const Eigen::MatrixXd& probabilities) {
  const Eigen::Index n = X.rows(), p = X.cols(), q = grid.n_periods();
  if (probabilities.rows() != n || probabilities.cols() != q)
    throw NumericalError("build_probability_tensor: probability matrix must be n x q");
  if (probabilities.size() > 0 && probabilities.minCoeff() < 0.0)
    throw NumericalError("build_probability_tensor: negative period probability");
  Tensor3 tensor(n, p, q);
  for (Eigen::Index k = 0; k < q; ++k)
    tensor.slice(k) =
        probabilities.col(k).array().sqrt().matrix().asDiagonal() * X;
  return tensor;
}

Tensor3 build_probability_tensor(const SurvivalDataset& data, const TimeGrid& grid,
                                 const Eigen::MatrixXd& probabilities) {
  return build_probability_tensor(data.X, grid, probabilities);
}

}  // namespace coxntf
