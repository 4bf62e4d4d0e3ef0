#include "coxntf/coxnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coxntf {

namespace {

// Samples sorted by follow-up time, with distinct event times grouped for
// Breslow tie handling. Built once per fit.
struct CoxOrdering {
  std::vector<int> sorted;  // sample indices, time ascending
  struct EventGroup {
    double time;
    int risk_start;  // first sorted position with t >= time
    int n_events;
  };
  std::vector<EventGroup> groups;

  static CoxOrdering build(const Eigen::VectorXd& time, const Eigen::VectorXi& event) {
    CoxOrdering ord;
    const int n = static_cast<int>(time.size());
    ord.sorted.resize(n);
    std::iota(ord.sorted.begin(), ord.sorted.end(), 0);
    std::sort(ord.sorted.begin(), ord.sorted.end(),
              [&](int a, int b) { return time(a) < time(b); });
    int pos = 0;
    while (pos < n) {
      const double t = time(ord.sorted[pos]);
      int end = pos, deaths = 0;
      while (end < n && time(ord.sorted[end]) == t) {
        if (event(ord.sorted[end]) == 1) ++deaths;
        ++end;
      }
      if (deaths > 0) ord.groups.push_back({t, pos, deaths});
      pos = end;
    }
    return ord;
  }
};

// Breslow partial log-likelihood plus per-sample gradient and (diagonal)
// curvature of the log-likelihood in eta. Risk sums are centered by max(eta)
// so the exponentials cannot overflow.
struct Derivatives {
  double loglik;
  Eigen::VectorXd grad;    // d loglik / d eta_i
  Eigen::VectorXd weight;  // -d^2 loglik / d eta_i^2 (diagonal), >= 0
};

Derivatives cox_derivatives(const CoxOrdering& ord, const Eigen::VectorXd& time,
                            const Eigen::VectorXi& event, const Eigen::VectorXd& eta,
                            bool with_weights) {
  const int n = static_cast<int>(eta.size());
  const double center = eta.maxCoeff();
  Eigen::VectorXd exb(n);  // exp(eta - center), in sorted order
  for (int pos = 0; pos < n; ++pos) exb(pos) = std::exp(eta(ord.sorted[pos]) - center);

  Eigen::VectorXd suffix(n + 1);  // risk-set sums of exb
  suffix(n) = 0.0;
  for (int pos = n - 1; pos >= 0; --pos) suffix(pos) = suffix(pos + 1) + exb(pos);

  Derivatives out;
  out.loglik = 0.0;
  out.grad.resize(n);
  if (with_weights) out.weight.resize(n);

  double cum1 = 0.0, cum2 = 0.0;  // running sums of d/S0 and d/S0^2
  std::size_t g = 0;
  for (int pos = 0; pos < n; ++pos) {
    const int i = ord.sorted[pos];
    while (g < ord.groups.size() && ord.groups[g].time <= time(i)) {
      const double s0 = suffix(ord.groups[g].risk_start);
      const double d = ord.groups[g].n_events;
      out.loglik -= d * (center + std::log(s0));
      cum1 += d / s0;
      cum2 += d / (s0 * s0);
      ++g;
    }
    if (event(i) == 1) out.loglik += eta(i);
    out.grad(i) = (event(i) == 1 ? 1.0 : 0.0) - exb(pos) * cum1;
    if (with_weights)
      out.weight(i) = std::max(exb(pos) * cum1 - exb(pos) * exb(pos) * cum2, 0.0);
  }
  return out;
}

double penalty(const Eigen::VectorXd& beta, double l1_ratio) {
  return l1_ratio * beta.lpNorm<1>() + 0.5 * (1.0 - l1_ratio) * beta.squaredNorm();
}

double penalized_objective(const CoxOrdering& ord, const SurvivalDataset& data,
                           const Eigen::MatrixXd& X, const Eigen::VectorXd& beta,
                           double lambda, double l1_ratio) {
  const Eigen::VectorXd eta = X * beta;
  const double ll = cox_derivatives(ord, data.time, data.event, eta, false).loglik;
  return -ll / static_cast<double>(X.rows()) + lambda * penalty(beta, l1_ratio);
}

StepFunction breslow_baseline(const CoxOrdering& ord, const Eigen::VectorXd& time,
                              const Eigen::VectorXd& eta) {
  const int n = static_cast<int>(eta.size());
  const double center = eta.maxCoeff();
  Eigen::VectorXd exb(n);
  for (int pos = 0; pos < n; ++pos) exb(pos) = std::exp(eta(ord.sorted[pos]) - center);
  Eigen::VectorXd suffix(n + 1);
  suffix(n) = 0.0;
  for (int pos = n - 1; pos >= 0; --pos) suffix(pos) = suffix(pos + 1) + exb(pos);

  std::vector<double> knots, values;
  double cum = 0.0;
  for (const auto& grp : ord.groups) {
    cum += grp.n_events * std::exp(-center) / suffix(grp.risk_start);
    knots.push_back(grp.time);
    values.push_back(cum);
  }
  return StepFunction(std::move(knots), std::move(values), 0.0);
}

}  // namespace

double breslow_partial_loglik(const SurvivalDataset& data, const Eigen::VectorXd& eta) {
  const CoxOrdering ord = CoxOrdering::build(data.time, data.event);
  return cox_derivatives(ord, data.time, data.event, eta, false).loglik;
}

double smallest_all_zero_lambda(const SurvivalDataset& data, double l1_ratio) {
  const CoxOrdering ord = CoxOrdering::build(data.time, data.event);
  const Eigen::VectorXd eta = Eigen::VectorXd::Zero(data.n_samples());
  const Derivatives d0 = cox_derivatives(ord, data.time, data.event, eta, false);
  const double n = static_cast<double>(data.n_samples());
  const double max_score = (data.X.transpose() * d0.grad).cwiseAbs().maxCoeff();
  // nudged up one ulp-scale so the KKT check holds exactly at lambda_max
  return max_score / (n * l1_ratio) * (1.0 + 1e-12);
}

CoxnetModel coxnet_fit(const SurvivalDataset& data, const CoxnetOptions& opts,
                       const SurvivalDataset* validation, Warnings* warnings) {
  data.validate();
  if (!(opts.l1_ratio > 0.0 && opts.l1_ratio <= 1.0))
    throw NumericalError("coxnet_fit: l1_ratio must lie in (0, 1]");
  if (opts.path_length < 1) throw NumericalError("coxnet_fit: path_length must be >= 1");

  const Eigen::MatrixXd& X = data.X;
  const Eigen::Index n = X.rows(), p = X.cols();
  const double nd = static_cast<double>(n);
  const CoxOrdering ord = CoxOrdering::build(data.time, data.event);

  CoxnetModel model;
  model.l1_ratio = opts.l1_ratio;
  model.feature_names = data.feature_names;

  // lambda path
  if (!opts.lambda_path.empty()) {
    model.lambda_path = opts.lambda_path;
  } else {
    const double lambda_max = smallest_all_zero_lambda(data, opts.l1_ratio);
    double min_ratio = opts.lambda_min_ratio;
    if (min_ratio <= 0.0) min_ratio = n > p ? 0.01 : 0.05;
    const int len = opts.path_length;
    model.lambda_path.resize(len);
    for (int l = 0; l < len; ++l)
      model.lambda_path[l] =
          len == 1 ? lambda_max
                   : lambda_max * std::pow(min_ratio, static_cast<double>(l) /
                                                          static_cast<double>(len - 1));
  }
  const int path_len = static_cast<int>(model.lambda_path.size());

  Eigen::MatrixXd beta_path(p, path_len);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  bool all_converged = true;

  for (int l = 0; l < path_len; ++l) {
    const double lambda = model.lambda_path[l];
    const double thresh = nd * lambda * opts.l1_ratio;
    const double ridge = nd * lambda * (1.0 - opts.l1_ratio);

    // Outer loop: re-derive the quadratic model at the current iterate.
    // Inner loop: cyclic coordinate descent on that model until stable.
    // A backtracking step on the outer displacement keeps the penalized
    // objective monotone (asserted below at tolerance 1e-10).
    bool converged = false;
    int sweeps_used = 0;
    double obj = penalized_objective(ord, data, X, beta, lambda, opts.l1_ratio);
    while (!converged && sweeps_used < opts.max_sweeps) {
      const Eigen::VectorXd beta_outer = beta;
      Derivatives d =
          cox_derivatives(ord, data.time, data.event, X * beta, true);
      Eigen::VectorXd curv(p);
      for (Eigen::Index j = 0; j < p; ++j)
        curv(j) = d.weight.dot(X.col(j).cwiseAbs2());

      // |z| within rounding noise of the threshold counts as zero, so ties
      // (duplicated features) cannot leave ulp-sized ghost coefficients.
      const double guard = thresh * (1.0 + 1e-12);
      while (sweeps_used < opts.max_sweeps) {
        ++sweeps_used;
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          const Eigen::VectorXd& xj = X.col(j);
          const double z = beta(j) * curv(j) + d.grad.dot(xj);
          double bnew = 0.0;
          if (z > guard)
            bnew = (z - thresh) / (curv(j) + ridge);
          else if (z < -guard)
            bnew = (z + thresh) / (curv(j) + ridge);
          if (!std::isfinite(bnew)) bnew = 0.0;
          const double delta = bnew - beta(j);
          if (delta != 0.0) {
            d.grad -= delta * d.weight.cwiseProduct(xj);
            beta(j) = bnew;
            max_delta = std::max(max_delta, std::abs(delta));
          }
        }
        if (max_delta < opts.tol) break;
      }

      double new_obj = penalized_objective(ord, data, X, beta, lambda, opts.l1_ratio);
      if (new_obj > obj + 1e-10) {  // quadratic model overstepped
        double step = 0.5;
        const Eigen::VectorXd proposal = beta;
        while (step > 1e-12) {
          beta = beta_outer + step * (proposal - beta_outer);
          new_obj = penalized_objective(ord, data, X, beta, lambda, opts.l1_ratio);
          if (new_obj <= obj + 1e-12) break;
          step *= 0.5;
        }
        if (new_obj > obj + 1e-12) {  // no usable step: keep previous iterate
          beta = beta_outer;
          new_obj = obj;
          converged = true;
        }
      }
      if (new_obj > obj + 1e-10)
        throw NumericalError("coxnet_fit: objective increased across a sweep");
      obj = new_obj;
      if ((beta - beta_outer).cwiseAbs().maxCoeff() < opts.tol) converged = true;
    }
    if (!converged) all_converged = false;
    beta_path.col(l) = beta;
  }

  if (!all_converged)
    warn(warnings, "coxnet_fit: coordinate descent hit the sweep limit; "
                   "returning best iterate");
  model.converged = all_converged;

  // lambda selection
  int chosen = path_len / 2;
  if (validation != nullptr) {
    validation->validate();
    if (validation->X.cols() != p)
      throw SchemaError("coxnet_fit: validation feature count mismatch");
    double best = -1.0;
    for (int l = 0; l < path_len; ++l) {
      const Eigen::VectorXd risk = validation->X * beta_path.col(l);
      const double ci = harrell_cindex(validation->time, validation->event, risk);
      if (ci > best) {
        best = ci;
        chosen = l;
      }
    }
  }

  model.lambda = model.lambda_path[static_cast<std::size_t>(chosen)];
  model.beta = beta_path.col(chosen);
  model.baseline_cum_hazard = breslow_baseline(ord, data.time, X * model.beta);
  return model;
}

Eigen::VectorXd predict_risk(const CoxnetModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.beta.size())
    throw SchemaError("predict_risk: expected " + std::to_string(model.beta.size()) +
                      " feature columns, got " + std::to_string(X.cols()));
  return X * model.beta;
}

double survival_probability(const CoxnetModel& model, const Eigen::VectorXd& x,
                            double u) {
  if (u < 0.0) throw NumericalError("survival_probability: time must be >= 0");
  const double eta = model.beta.dot(x);
  return std::exp(-model.baseline_cum_hazard(u) * std::exp(eta));
}

Eigen::VectorXd period_event_probability(const CoxnetModel& model,
                                         const Eigen::VectorXd& x,
                                         const TimeGrid& grid) {
  const int q = grid.n_periods();
  const auto& bounds = grid.boundaries();
  const double eta = model.beta.dot(x);
  const double exp_eta = std::exp(eta);
  const double h_last = model.baseline_cum_hazard.last_value();

  Eigen::VectorXd prob(q);
  double surv_prev = 1.0;  // S(0 | x)
  for (int k = 1; k <= q; ++k) {
    const double h = std::isinf(bounds[static_cast<std::size_t>(k)])
                         ? h_last
                         : model.baseline_cum_hazard(bounds[static_cast<std::size_t>(k)]);
    const double surv = std::exp(-h * exp_eta);
    prob(k - 1) = std::max(surv_prev - surv, 0.0);
    surv_prev = surv;
  }
  return prob;
}

Eigen::MatrixXd period_event_probability(const CoxnetModel& model,
                                         const Eigen::MatrixXd& X,
                                         const TimeGrid& grid) {
  Eigen::MatrixXd prob(X.rows(), grid.n_periods());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    prob.row(i) = period_event_probability(model, x, grid);
  }
  return prob;
}

int n_selected_features(const CoxnetModel& model) {
  int count = 0;
  for (Eigen::Index j = 0; j < model.beta.size(); ++j)
    if (model.beta(j) != 0.0) ++count;
  return count;
}

}  // namespace coxntf
