#include "coxntf/factor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace coxntf {

namespace {

constexpr double kColumnFloor = 1e-16;

// Uniform [0,1) draws scaled to the data magnitude. The scale factor makes
// the HALS trajectory exactly equivariant under tensor rescaling, so the
// documented scale-invariance property holds to rounding accuracy.
Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols,
                               std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * unif(rng);
  return m;
}

// Gauss-Seidel sweep of closed-form HALS column updates for one factor,
// given the matricized-tensor-times-Khatri-Rao product and the Gram matrix
// of the other factors. Columns that collapse to zero are floored.
void hals_factor_sweep(Eigen::MatrixXd& factor, const Eigen::MatrixXd& mttkrp,
                       const Eigen::MatrixXd& gram, std::set<int>* degenerate) {
  const Eigen::Index r = factor.cols();
  for (Eigen::Index l = 0; l < r; ++l) {
    const double g = gram(l, l);
    Eigen::VectorXd col =
        factor.col(l) + (mttkrp.col(l) - factor * gram.col(l)) / g;
    col = col.cwiseMax(0.0);
    if (col.maxCoeff() <= 0.0) {
      col.setConstant(kColumnFloor);
      if (degenerate) degenerate->insert(static_cast<int>(l));
    }
    factor.col(l) = col;
  }
}

Eigen::MatrixXd mttkrp_mode1(const Tensor3& x, const Eigen::MatrixXd& h,
                             const Eigen::MatrixXd& q) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.n_samples(), h.cols());
  for (Eigen::Index k = 0; k < x.n_periods(); ++k)
    p.noalias() += (x.slice(k) * h) * q.row(k).asDiagonal();
  return p;
}

Eigen::MatrixXd mttkrp_mode2(const Tensor3& x, const Eigen::MatrixXd& w,
                             const Eigen::MatrixXd& q) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.n_features(), w.cols());
  for (Eigen::Index k = 0; k < x.n_periods(); ++k)
    p.noalias() += (x.slice(k).transpose() * w) * q.row(k).asDiagonal();
  return p;
}

Eigen::MatrixXd mttkrp_mode3(const Tensor3& x, const Eigen::MatrixXd& w,
                             const Eigen::MatrixXd& h) {
  Eigen::MatrixXd p(x.n_periods(), w.cols());
  for (Eigen::Index k = 0; k < x.n_periods(); ++k)
    p.row(k) = w.cwiseProduct(x.slice(k) * h).colwise().sum();
  return p;
}

// ||X - Xhat|| via ||X||^2 - 2<X, Xhat> + ||Xhat||^2, with <X, Xhat> taken
// from the mttkrp of the factor updated last. Avoids forming the
// reconstruction; the max(0, .) guard absorbs cancellation noise near exact
// fits.
double residual_norm(double x_sq_norm, const Eigen::MatrixXd& last_factor,
                     const Eigen::MatrixXd& last_mttkrp,
                     const Eigen::MatrixXd& others_gram) {
  const double inner = last_factor.cwiseProduct(last_mttkrp).sum();
  const double model_sq = others_gram
                              .cwiseProduct(last_factor.transpose() * last_factor)
                              .sum();
  return std::sqrt(std::max(x_sq_norm - 2.0 * inner + model_sq, 0.0));
}

}  // namespace

Factorization ntf_fit(const Tensor3& tensor, int rank, const HalsOptions& opts,
                      std::uint64_t seed, Warnings* warnings) {
  if (rank < 1) throw NumericalError("ntf_fit: rank must be >= 1");
  tensor.validate();
  const Eigen::Index n = tensor.n_samples(), p = tensor.n_features(),
                     q = tensor.n_periods();
  const double tensor_norm = std::sqrt(tensor.squared_norm());
  if (tensor_norm == 0.0) throw NumericalError("ntf_fit: all-zero tensor");
  if (rank > std::min({n, p, q}))
    warn(warnings, "ntf_fit: rank " + std::to_string(rank) +
                       " exceeds a tensor dimension");

  std::mt19937_64 rng(seed);
  const double scale = std::cbrt(
      tensor_norm / std::sqrt(static_cast<double>(n) * static_cast<double>(p) *
                              static_cast<double>(q)));
  Eigen::MatrixXd w = uniform_matrix(n, rank, rng, scale);
  Eigen::MatrixXd h = uniform_matrix(p, rank, rng, scale);
  Eigen::MatrixXd qf = uniform_matrix(q, rank, rng, scale);

  Factorization out;
  out.rank = rank;
  out.seed = seed;
  std::set<int> degenerate;

  const double x_sq_norm = tensor.squared_norm();
  double prev_err = std::numeric_limits<double>::infinity();
  int sweep = 0;
  while (sweep < opts.max_iter) {
    ++sweep;
    Eigen::MatrixXd gram_hq =
        (h.transpose() * h).cwiseProduct(qf.transpose() * qf);
    hals_factor_sweep(w, mttkrp_mode1(tensor, h, qf), gram_hq, &degenerate);

    Eigen::MatrixXd gram_wq =
        (w.transpose() * w).cwiseProduct(qf.transpose() * qf);
    hals_factor_sweep(h, mttkrp_mode2(tensor, w, qf), gram_wq, &degenerate);

    Eigen::MatrixXd gram_wh = (w.transpose() * w).cwiseProduct(h.transpose() * h);
    const Eigen::MatrixXd mttkrp_q = mttkrp_mode3(tensor, w, h);
    hals_factor_sweep(qf, mttkrp_q, gram_wh, &degenerate);

    const double err = residual_norm(x_sq_norm, qf, mttkrp_q, gram_wh) / tensor_norm;

    // unit-norm covariate/temporal columns, scale absorbed into meta-scores
    for (int l = 0; l < rank; ++l) {
      const double nh = h.col(l).norm(), nq = qf.col(l).norm();
      w.col(l) *= nh * nq;
      h.col(l) /= nh;
      qf.col(l) /= nq;
    }

    out.error_history.push_back(err);
    if (prev_err - err < opts.tol) break;
    prev_err = err;
  }

  out.meta_scores = std::move(w);
  out.covariate_patterns = std::move(h);
  out.temporal_patterns = std::move(qf);
  out.iterations = sweep;
  out.relative_error = out.error_history.back();
  out.degenerate_components.assign(degenerate.begin(), degenerate.end());
  if (!degenerate.empty())
    warn(warnings, "ntf_fit: " + std::to_string(degenerate.size()) +
                       " component(s) collapsed to zero");
  return out;
}

Eigen::MatrixXd ntf_transform(const Tensor3& tensor,
                              const Eigen::MatrixXd& covariate_patterns,
                              const Eigen::MatrixXd& temporal_patterns,
                              const HalsOptions& opts) {
  if (covariate_patterns.rows() != tensor.n_features() ||
      temporal_patterns.rows() != tensor.n_periods() ||
      covariate_patterns.cols() != temporal_patterns.cols())
    throw NumericalError("ntf_transform: basis dimensions do not match tensor");
  const Eigen::Index r = covariate_patterns.cols();
  const double tensor_norm = std::sqrt(tensor.squared_norm());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(tensor.n_samples(), r);
  if (tensor_norm == 0.0) return w;

  const Eigen::MatrixXd mttkrp =
      mttkrp_mode1(tensor, covariate_patterns, temporal_patterns);
  Eigen::MatrixXd gram = (covariate_patterns.transpose() * covariate_patterns)
                             .cwiseProduct(temporal_patterns.transpose() *
                                           temporal_patterns);
  for (Eigen::Index l = 0; l < r; ++l)
    if (gram(l, l) <= 0.0)
      throw NumericalError("ntf_transform: basis component " + std::to_string(l) +
                           " is zero");

  const double x_sq_norm = tensor.squared_norm();
  double prev_err = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    hals_factor_sweep(w, mttkrp, gram, nullptr);
    const double err = residual_norm(x_sq_norm, w, mttkrp, gram) / tensor_norm;
    if (prev_err - err < opts.tol) break;
    prev_err = err;
  }
  return w;
}

NmfFactorization nmf_fit(const Eigen::MatrixXd& matrix, int rank,
                         const HalsOptions& opts, std::uint64_t seed,
                         Warnings* warnings) {
  if (rank < 1) throw NumericalError("nmf_fit: rank must be >= 1");
  if (!matrix.allFinite() || (matrix.size() > 0 && matrix.minCoeff() < 0.0))
    throw NumericalError("nmf_fit: matrix entries must be finite and nonnegative");
  const double matrix_norm = matrix.norm();
  if (matrix_norm == 0.0) throw NumericalError("nmf_fit: all-zero matrix");
  if (rank > std::min(matrix.rows(), matrix.cols()))
    warn(warnings, "nmf_fit: rank " + std::to_string(rank) +
                       " exceeds a matrix dimension");

  std::mt19937_64 rng(seed);
  const double scale = std::sqrt(
      matrix_norm / std::sqrt(static_cast<double>(matrix.rows()) *
                              static_cast<double>(matrix.cols())));
  Eigen::MatrixXd w = uniform_matrix(matrix.rows(), rank, rng, scale);
  Eigen::MatrixXd h = uniform_matrix(matrix.cols(), rank, rng, scale);

  NmfFactorization out;
  out.rank = rank;
  out.seed = seed;
  std::set<int> degenerate;

  const double m_sq_norm = matrix.squaredNorm();
  double prev_err = std::numeric_limits<double>::infinity();
  int sweep = 0;
  while (sweep < opts.max_iter) {
    ++sweep;
    hals_factor_sweep(w, matrix * h, h.transpose() * h, &degenerate);
    const Eigen::MatrixXd mttkrp_h = matrix.transpose() * w;
    const Eigen::MatrixXd gram_w = w.transpose() * w;
    hals_factor_sweep(h, mttkrp_h, gram_w, &degenerate);
    const double err = residual_norm(m_sq_norm, h, mttkrp_h, gram_w) / matrix_norm;
    for (int l = 0; l < rank; ++l) {
      const double nh = h.col(l).norm();
      w.col(l) *= nh;
      h.col(l) /= nh;
    }
    out.error_history.push_back(err);
    if (prev_err - err < opts.tol) break;
    prev_err = err;
  }

  out.meta_scores = std::move(w);
  out.covariate_patterns = std::move(h);
  out.iterations = sweep;
  out.relative_error = out.error_history.back();
  out.degenerate_components.assign(degenerate.begin(), degenerate.end());
  if (!degenerate.empty())
    warn(warnings, "nmf_fit: " + std::to_string(degenerate.size()) +
                       " component(s) collapsed to zero");
  return out;
}

Eigen::MatrixXd nmf_transform(const Eigen::MatrixXd& matrix,
                              const Eigen::MatrixXd& covariate_patterns,
                              const HalsOptions& opts) {
  if (covariate_patterns.rows() != matrix.cols())
    throw NumericalError("nmf_transform: basis dimensions do not match matrix");
  const Eigen::Index r = covariate_patterns.cols();
  const double matrix_norm = matrix.norm();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(matrix.rows(), r);
  if (matrix_norm == 0.0) return w;

  const Eigen::MatrixXd mttkrp = matrix * covariate_patterns;
  Eigen::MatrixXd gram = covariate_patterns.transpose() * covariate_patterns;
  for (Eigen::Index l = 0; l < r; ++l)
    if (gram(l, l) <= 0.0)
      throw NumericalError("nmf_transform: basis component " + std::to_string(l) +
                           " is zero");

  const double m_sq_norm = matrix.squaredNorm();
  double prev_err = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    hals_factor_sweep(w, mttkrp, gram, nullptr);
    const double err = residual_norm(m_sq_norm, w, mttkrp, gram) / matrix_norm;
    if (prev_err - err < opts.tol) break;
    prev_err = err;
  }
  return w;
}

}  // namespace coxntf
