#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace coxntf {

// Input/schema problems (bad CSV, column mismatch, invalid survival data).
// The CLI maps these to exit code 1.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (degenerate fits, empty risk sets, all-zero tensors).
// The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, const std::string& msg) {
  if (sink) sink->push_back(msg);
}

// Right-continuous step function with left limits. Shared representation for
// Kaplan-Meier curves (nonincreasing, starts at 1) and the Breslow cumulative
// hazard (nondecreasing, starts at 0).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> knots, std::vector<double> values,
               double value_before_first_knot)
      : knots_(std::move(knots)),
        values_(std::move(values)),
        before_(value_before_first_knot) {
    if (knots_.size() != values_.size())
      throw std::invalid_argument("StepFunction: knots/values length mismatch");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (!(knots_[i - 1] < knots_[i]))
        throw std::invalid_argument("StepFunction: knots must increase");
  }

  // f(t): value of the last knot <= t, or value_before_first_knot.
  double operator()(double t) const {
    std::size_t lo = upper_bound(t);
    return lo == 0 ? before_ : values_[lo - 1];
  }

  // f(t-): value of the last knot strictly < t.
  double left_limit(double t) const {
    std::size_t lo = lower_bound(t);
    return lo == 0 ? before_ : values_[lo - 1];
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  double value_before_first_knot() const { return before_; }
  bool empty() const { return knots_.empty(); }
  double last_value() const { return knots_.empty() ? before_ : values_.back(); }
  double last_knot() const {
    return knots_.empty() ? -std::numeric_limits<double>::infinity() : knots_.back();
  }

 private:
  // index of first knot > t
  std::size_t upper_bound(double t) const {
    return static_cast<std::size_t>(
        std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin());
  }
  // index of first knot >= t
  std::size_t lower_bound(double t) const {
    return static_cast<std::size_t>(
        std::lower_bound(knots_.begin(), knots_.end(), t) - knots_.begin());
  }

  std::vector<double> knots_;
  std::vector<double> values_;
  double before_ = 0.0;
};

// Partition of follow-up time into q periods (s(k-1), s(k)], with s(0) = 0
// and s(q) = +inf so every positive time falls in exactly one period.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> boundaries) : s_(std::move(boundaries)) {
    if (s_.size() < 2) throw std::invalid_argument("TimeGrid: need at least 2 boundaries");
    if (s_.front() != 0.0)
      throw std::invalid_argument("TimeGrid: first boundary must be 0");
    if (!std::isinf(s_.back()))
      throw std::invalid_argument("TimeGrid: last boundary must be +inf");
    for (std::size_t k = 1; k < s_.size(); ++k)
      if (!(s_[k - 1] < s_[k]))
        throw std::invalid_argument("TimeGrid: boundaries must strictly increase");
  }

  int n_periods() const { return static_cast<int>(s_.size()) - 1; }

  // 0-based period index k such that s(k) < t <= s(k+1).
  int period_of(double t) const {
    if (!(t > 0.0) || std::isinf(t))
      throw std::invalid_argument("TimeGrid::period_of: time must be positive finite");
    auto it = std::lower_bound(s_.begin() + 1, s_.end(), t);
    return static_cast<int>(it - s_.begin()) - 1;
  }

  const std::vector<double>& boundaries() const { return s_; }
  // Boundaries without the leading 0 and trailing +inf.
  std::vector<double> interior() const {
    return {s_.begin() + 1, s_.end() - 1};
  }

 private:
  std::vector<double> s_;
};

// Right-censored survival data with a nonnegative covariate matrix.
struct SurvivalDataset {
  Eigen::MatrixXd X;                       // n x p, entries finite and >= 0
  Eigen::VectorXd time;                    // n, positive finite
  Eigen::VectorXi event;                   // n, 1 = event observed, 0 = censored
  std::vector<std::string> feature_names;  // p labels
  std::string time_unit;

  Eigen::Index n_samples() const { return X.rows(); }
  Eigen::Index n_features() const { return X.cols(); }

  void validate() const {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n == 0) throw SchemaError("dataset is empty");
    if (time.size() != n || event.size() != n)
      throw SchemaError("dataset: time/event length does not match X rows");
    if (!feature_names.empty() &&
        static_cast<Eigen::Index>(feature_names.size()) != p)
      throw SchemaError("dataset: feature_names length does not match X columns");
    if (!X.allFinite() || X.minCoeff() < 0.0)
      throw SchemaError("dataset: covariates must be finite and nonnegative");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(time(i) > 0.0) || !std::isfinite(time(i)))
        throw SchemaError("dataset: times must be positive finite (row " +
                          std::to_string(i) + ")");
      if (event(i) != 0 && event(i) != 1)
        throw SchemaError("dataset: event indicator must be 0 or 1 (row " +
                          std::to_string(i) + ")");
    }
    if (event.sum() == 0) throw SchemaError("dataset: no observed events");
  }

  SurvivalDataset subset(const std::vector<int>& rows) const {
    SurvivalDataset out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.time.resize(static_cast<Eigen::Index>(rows.size()));
    out.event.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
      out.time(static_cast<Eigen::Index>(i)) = time(rows[i]);
      out.event(static_cast<Eigen::Index>(i)) = event(rows[i]);
    }
    out.feature_names = feature_names;
    out.time_unit = time_unit;
    return out;
  }
};

}  // namespace coxntf
