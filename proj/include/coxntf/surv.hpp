#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "coxntf/csv.hpp"
#include "coxntf/types.hpp"

namespace coxntf {

// ---------------------------------------------------------------------------
// Preprocessing: typed CSV table -> nonnegative covariate matrix.
// Categorical columns expand to one binary column per level (no reference
// level dropped); numeric columns are min-max scaled to [0,1].
// ---------------------------------------------------------------------------

struct TableSchema {
  std::string time_column = "time";
  std::string event_column = "event";
};

struct ColumnScaler {
  enum class Kind { Numeric, Categorical };
  std::string name;
  Kind kind = Kind::Numeric;
  double min = 0.0;                 // numeric
  double max = 0.0;                 // numeric; min == max marks a constant column
  std::vector<std::string> levels;  // categorical, sorted
};

// Fitted transformation from a raw table to model inputs. Applying the same
// scaler to held-out data reproduces the training-time encoding exactly.
struct Scaler {
  TableSchema schema;
  std::vector<ColumnScaler> columns;
  std::vector<std::string> feature_names;  // expanded, in output order

  Eigen::Index n_features() const {
    return static_cast<Eigen::Index>(feature_names.size());
  }

  // Transform feature columns only; time/event columns in `table` are
  // ignored and may be absent. Never reads survival information.
  Eigen::MatrixXd transform_features(const RawTable& table,
                                     Warnings* warnings = nullptr) const;

  // Transform features and also extract time/event (both columns required).
  SurvivalDataset transform(const RawTable& table, Warnings* warnings = nullptr) const;
};

struct PreprocessResult {
  SurvivalDataset dataset;
  Scaler scaler;
  Warnings warnings;
};

PreprocessResult preprocess(const RawTable& table, const TableSchema& schema = {});

// ---------------------------------------------------------------------------
// Survival statistics.
// ---------------------------------------------------------------------------

// Product-limit estimate. Ties are grouped: censored observations at a tied
// time remain at risk for the events at that time.
StepFunction kaplan_meier(const Eigen::VectorXd& time, const Eigen::VectorXi& event);

// Inverse-probability-of-censoring weights. Events get 1/G(t-), where G is
// the censoring survival curve; censored rows get weight 0. A zero G at an
// event time is clamped to the smallest positive value G attains.
Eigen::VectorXd ipcw_weights(const Eigen::VectorXd& time, const Eigen::VectorXi& event,
                             Warnings* warnings = nullptr);

// Grid boundaries from percentiles of the observed times. Percentile rule:
// rank = 1 + (n-1)*p/100 over the order statistics, linear interpolation.
TimeGrid time_grid_from_percentiles(const Eigen::VectorXd& time,
                                    const std::vector<double>& percentiles =
                                        {10.0, 25.0, 50.0, 75.0, 90.0},
                                    Warnings* warnings = nullptr);

double percentile_linear(std::vector<double> sorted_values, double pct);

// Harrell's concordance index. Comparable pairs: t(i) < t(j) with c(i) = 1;
// tied risks count 0.5; tied event times are not comparable.
double harrell_cindex(const Eigen::VectorXd& time, const Eigen::VectorXi& event,
                      const Eigen::VectorXd& risk);

// Uno's IPCW concordance index. The censoring curve is estimated on the
// training sample; each comparable pair (t(i) <= tau, c(i) = 1) is weighted
// by G(t(i))^-2. Default tau (NaN) is the largest test event time.
double uno_cindex(const Eigen::VectorXd& time_train, const Eigen::VectorXi& event_train,
                  const Eigen::VectorXd& time_test, const Eigen::VectorXi& event_test,
                  const Eigen::VectorXd& risk_test,
                  double tau = std::numeric_limits<double>::quiet_NaN(),
                  Warnings* warnings = nullptr);

}  // namespace coxntf
