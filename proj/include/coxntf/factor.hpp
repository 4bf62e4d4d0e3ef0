#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "coxntf/types.hpp"

namespace coxntf {

// Dense nonnegative order-3 array, stored as one n x p matrix per period.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Eigen::Index n, Eigen::Index p, Eigen::Index q)
      : slices_(static_cast<std::size_t>(q), Eigen::MatrixXd::Zero(n, p)) {}

  Eigen::Index n_samples() const { return slices_.empty() ? 0 : slices_[0].rows(); }
  Eigen::Index n_features() const { return slices_.empty() ? 0 : slices_[0].cols(); }
  Eigen::Index n_periods() const { return static_cast<Eigen::Index>(slices_.size()); }

  Eigen::MatrixXd& slice(Eigen::Index k) { return slices_[static_cast<std::size_t>(k)]; }
  const Eigen::MatrixXd& slice(Eigen::Index k) const {
    return slices_[static_cast<std::size_t>(k)];
  }

  double& at(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return slices_[static_cast<std::size_t>(k)](i, j);
  }
  double at(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return slices_[static_cast<std::size_t>(k)](i, j);
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& m : slices_) s += m.squaredNorm();
    return s;
  }

  void validate() const {
    for (const auto& m : slices_)
      if (!m.allFinite() || (m.size() > 0 && m.minCoeff() < 0.0))
        throw NumericalError("tensor entries must be finite and nonnegative");
  }

 private:
  std::vector<Eigen::MatrixXd> slices_;
};

struct HalsOptions {
  int max_iter = 200;   // full sweeps over all factors
  double tol = 1e-6;    // stop when relative-error improvement drops below
};

// CP factorization with nonnegative factors. Columns of the covariate and
// temporal factors have unit Euclidean norm; scale lives in the meta-scores.
struct Factorization {
  Eigen::MatrixXd meta_scores;         // n x r  (sample loadings)
  Eigen::MatrixXd covariate_patterns;  // p x r, unit columns
  Eigen::MatrixXd temporal_patterns;   // q x r, unit columns
  int rank = 0;
  double relative_error = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> error_history;     // relative error after each sweep
  std::vector<int> degenerate_components;  // columns that collapsed to zero
};

struct NmfFactorization {
  Eigen::MatrixXd meta_scores;         // n x r
  Eigen::MatrixXd covariate_patterns;  // p x r, unit columns
  int rank = 0;
  double relative_error = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::vector<double> error_history;
  std::vector<int> degenerate_components;
};

Factorization ntf_fit(const Tensor3& tensor, int rank, const HalsOptions& opts = {},
                      std::uint64_t seed = 0, Warnings* warnings = nullptr);

// Nonnegative least-squares projection of a tensor onto fixed covariate and
// temporal bases; only the meta-scores are solved for. Rows are independent.
Eigen::MatrixXd ntf_transform(const Tensor3& tensor,
                              const Eigen::MatrixXd& covariate_patterns,
                              const Eigen::MatrixXd& temporal_patterns,
                              const HalsOptions& opts = {});

NmfFactorization nmf_fit(const Eigen::MatrixXd& matrix, int rank,
                         const HalsOptions& opts = {}, std::uint64_t seed = 0,
                         Warnings* warnings = nullptr);

Eigen::MatrixXd nmf_transform(const Eigen::MatrixXd& matrix,
                              const Eigen::MatrixXd& covariate_patterns,
                              const HalsOptions& opts = {});

}  // namespace coxntf
