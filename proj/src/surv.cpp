#include "coxntf/surv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace coxntf {

namespace {

bool column_is_numeric(const std::vector<std::string>& cells) {
  double v;
  for (const auto& cell : cells)
    if (!parse_double(cell, &v)) return false;
  return true;
}

}  // namespace

PreprocessResult preprocess(const RawTable& table, const TableSchema& schema) {
  PreprocessResult res;
  if (table.n_rows() == 0) throw SchemaError("table has no data rows");

  const int time_idx = table.column_index(schema.time_column);
  const int event_idx = table.column_index(schema.event_column);
  if (time_idx < 0)
    throw SchemaError("missing required column '" + schema.time_column + "'");
  if (event_idx < 0)
    throw SchemaError("missing required column '" + schema.event_column + "'");

  const std::size_t n = table.n_rows();
  Eigen::VectorXd time(n);
  Eigen::VectorXi event(n);
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < n; ++i) {
    double t, e;
    if (!parse_double(table.columns[time_idx][i], &t) || !(t > 0.0) || !std::isfinite(t))
      bad.push_back("row " + std::to_string(i + 1) + ": time '" +
                    table.columns[time_idx][i] + "' is not a positive number");
    else
      time(static_cast<Eigen::Index>(i)) = t;
    if (!parse_double(table.columns[event_idx][i], &e) || (e != 0.0 && e != 1.0))
      bad.push_back("row " + std::to_string(i + 1) + ": event '" +
                    table.columns[event_idx][i] + "' is not 0 or 1");
    else
      event(static_cast<Eigen::Index>(i)) = static_cast<int>(e);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "invalid survival columns (" << bad.size() << " problem(s)):";
    for (std::size_t i = 0; i < bad.size() && i < 10; ++i) msg << "\n  " << bad[i];
    if (bad.size() > 10) msg << "\n  ...";
    throw SchemaError(msg.str());
  }

  res.scaler.schema = schema;
  for (std::size_t j = 0; j < table.n_cols(); ++j) {
    if (static_cast<int>(j) == time_idx || static_cast<int>(j) == event_idx) continue;
    const auto& cells = table.columns[j];
    ColumnScaler col;
    col.name = table.column_names[j];
    if (column_is_numeric(cells)) {
      col.kind = ColumnScaler::Kind::Numeric;
      double lo = std::numeric_limits<double>::infinity(), hi = -lo, v = 0;
      for (const auto& cell : cells) {
        parse_double(cell, &v);
        if (!std::isfinite(v))
          throw SchemaError("column '" + col.name + "' contains a non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      col.min = lo;
      col.max = hi;
      if (lo == hi)
        warn(&res.warnings, "column '" + col.name + "' is constant; scaled to all zeros");
      res.scaler.feature_names.push_back(col.name);
    } else {
      col.kind = ColumnScaler::Kind::Categorical;
      std::set<std::string> levels(cells.begin(), cells.end());
      col.levels.assign(levels.begin(), levels.end());
      for (const auto& lev : col.levels)
        res.scaler.feature_names.push_back(col.name + "=" + lev);
    }
    res.scaler.columns.push_back(std::move(col));
  }
  if (res.scaler.feature_names.empty())
    throw SchemaError("table has no feature columns besides time/event");

  res.dataset = res.scaler.transform(table, &res.warnings);
  res.dataset.validate();
  return res;
}

Eigen::MatrixXd Scaler::transform_features(const RawTable& table,
                                           Warnings* warnings) const {
  const std::size_t n = table.n_rows();

  // Every column in the incoming table must be known: a scaler column, or
  // the (optional, ignored) time/event columns.
  std::vector<std::string> unknown;
  for (const auto& name : table.column_names) {
    if (name == schema.time_column || name == schema.event_column) continue;
    bool known = false;
    for (const auto& col : columns)
      if (col.name == name) known = true;
    if (!known) unknown.push_back(name);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown feature column(s):";
    for (const auto& name : unknown) msg += " '" + name + "'";
    throw SchemaError(msg);
  }

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), n_features());
  Eigen::Index out_col = 0;
  for (const auto& col : columns) {
    const int j = table.column_index(col.name);
    if (j < 0) throw SchemaError("missing feature column '" + col.name + "'");
    const auto& cells = table.columns[static_cast<std::size_t>(j)];
    if (col.kind == ColumnScaler::Kind::Numeric) {
      const double range = col.max - col.min;
      for (std::size_t i = 0; i < n; ++i) {
        double v;
        if (!parse_double(cells[i], &v))
          throw SchemaError("column '" + col.name + "' row " + std::to_string(i + 1) +
                            ": expected a number, got '" + cells[i] + "'");
        double scaled = range > 0.0 ? (v - col.min) / range : 0.0;
        X(static_cast<Eigen::Index>(i), out_col) = std::clamp(scaled, 0.0, 1.0);
      }
      ++out_col;
    } else {
      bool unseen = false;
      for (std::size_t i = 0; i < n; ++i) {
        auto it = std::lower_bound(col.levels.begin(), col.levels.end(), cells[i]);
        if (it != col.levels.end() && *it == cells[i]) {
          Eigen::Index offset = static_cast<Eigen::Index>(it - col.levels.begin());
          X(static_cast<Eigen::Index>(i), out_col + offset) = 1.0;
        } else {
          unseen = true;
        }
      }
      if (unseen)
        warn(warnings, "column '" + col.name +
                           "' has level(s) unseen at fit time; encoded as all zeros");
      out_col += static_cast<Eigen::Index>(col.levels.size());
    }
  }
  return X;
}

SurvivalDataset Scaler::transform(const RawTable& table, Warnings* warnings) const {
  const int time_idx = table.column_index(schema.time_column);
  const int event_idx = table.column_index(schema.event_column);
  if (time_idx < 0 || event_idx < 0)
    throw SchemaError("table is missing '" + schema.time_column + "'/'" +
                      schema.event_column + "' columns");
  SurvivalDataset ds;
  ds.X = transform_features(table, warnings);
  const std::size_t n = table.n_rows();
  ds.time.resize(static_cast<Eigen::Index>(n));
  ds.event.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double t, e;
    if (!parse_double(table.columns[time_idx][i], &t) || !(t > 0.0) || !std::isfinite(t))
      throw SchemaError("row " + std::to_string(i + 1) + ": invalid time '" +
                        table.columns[time_idx][i] + "'");
    if (!parse_double(table.columns[event_idx][i], &e) || (e != 0.0 && e != 1.0))
      throw SchemaError("row " + std::to_string(i + 1) + ": invalid event '" +
                        table.columns[event_idx][i] + "'");
    ds.time(static_cast<Eigen::Index>(i)) = t;
    ds.event(static_cast<Eigen::Index>(i)) = static_cast<int>(e);
  }
  ds.feature_names = feature_names;
  return ds;
}

StepFunction kaplan_meier(const Eigen::VectorXd& time, const Eigen::VectorXi& event) {
  const Eigen::Index n = time.size();
  if (n == 0) throw NumericalError("kaplan_meier: empty input");
  if (event.size() != n) throw NumericalError("kaplan_meier: length mismatch");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return time(a) < time(b); });

  std::vector<double> knots, values;
  double surv = 1.0;
  Eigen::Index at_risk = n;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = time(order[i]);
    long deaths = 0, total = 0;
    while (i < order.size() && time(order[i]) == t) {
      if (event(order[i]) == 1) ++deaths;
      ++total;
      ++i;
    }
    if (deaths > 0) {
      surv *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      knots.push_back(t);
      values.push_back(surv);
    }
    at_risk -= total;
  }
  return StepFunction(std::move(knots), std::move(values), 1.0);
}

Eigen::VectorXd ipcw_weights(const Eigen::VectorXd& time, const Eigen::VectorXi& event,
                             Warnings* warnings) {
  const Eigen::Index n = time.size();
  Eigen::VectorXi censoring_event(n);
  for (Eigen::Index i = 0; i < n; ++i) censoring_event(i) = 1 - event(i);
  const StepFunction censor_surv = kaplan_meier(time, censoring_event);

  double smallest_positive = 1.0;
  for (double v : censor_surv.values())
    if (v > 0.0) smallest_positive = std::min(smallest_positive, v);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  bool clamped = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (event(i) != 1) continue;
    double g = censor_surv.left_limit(time(i));
    if (g <= 0.0) {
      g = smallest_positive;
      clamped = true;
    }
    w(i) = 1.0 / g;
  }
  if (clamped)
    warn(warnings,
         "ipcw_weights: censoring survival reached 0 before an event time; "
         "clamped to smallest positive value");
  return w;
}

double percentile_linear(std::vector<double> sorted_values, double pct) {
  std::sort(sorted_values.begin(), sorted_values.end());
  const std::size_t n = sorted_values.size();
  if (n == 0) throw NumericalError("percentile of empty vector");
  if (n == 1) return sorted_values[0];
  const double rank = 1.0 + (static_cast<double>(n) - 1.0) * pct / 100.0;
  const double lo = std::floor(rank);
  const std::size_t li = static_cast<std::size_t>(lo) - 1;
  if (li + 1 >= n) return sorted_values[n - 1];
  const double frac = rank - lo;
  return sorted_values[li] + frac * (sorted_values[li + 1] - sorted_values[li]);
}

TimeGrid time_grid_from_percentiles(const Eigen::VectorXd& time,
                                    const std::vector<double>& percentiles,
                                    Warnings* warnings) {
  if (time.size() == 0) throw NumericalError("time_grid_from_percentiles: empty input");
  for (std::size_t i = 0; i < percentiles.size(); ++i) {
    if (!(percentiles[i] > 0.0 && percentiles[i] < 100.0))
      throw NumericalError("percentiles must lie strictly inside (0, 100)");
    if (i > 0 && !(percentiles[i - 1] < percentiles[i]))
      throw NumericalError("percentiles must strictly increase");
  }
  std::vector<double> values(time.data(), time.data() + time.size());
  std::sort(values.begin(), values.end());
  if (values.front() == values.back())
    throw NumericalError(
        "time_grid_from_percentiles: need at least 2 distinct times");

  std::vector<double> bounds{0.0};
  bool collapsed = false;
  for (double p : percentiles) {
    double b = percentile_linear(values, p);
    if (b <= bounds.back()) {
      collapsed = true;
      continue;
    }
    bounds.push_back(b);
  }
  if (collapsed)
    warn(warnings, "time grid: duplicate percentile boundaries collapsed");
  bounds.push_back(std::numeric_limits<double>::infinity());
  return TimeGrid(std::move(bounds));
}

double harrell_cindex(const Eigen::VectorXd& time, const Eigen::VectorXi& event,
                      const Eigen::VectorXd& risk) {
  const Eigen::Index n = time.size();
  if (event.size() != n || risk.size() != n)
    throw NumericalError("harrell_cindex: length mismatch");
  double concordant = 0.0, comparable = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (event(i) != 1) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (time(i) >= time(j)) continue;
      comparable += 1.0;
      if (risk(i) > risk(j))
        concordant += 1.0;
      else if (risk(i) == risk(j))
        concordant += 0.5;
    }
  }
  if (comparable == 0.0) throw NumericalError("harrell_cindex: no comparable pairs");
  return concordant / comparable;
}

double uno_cindex(const Eigen::VectorXd& time_train, const Eigen::VectorXi& event_train,
                  const Eigen::VectorXd& time_test, const Eigen::VectorXi& event_test,
                  const Eigen::VectorXd& risk_test, double tau, Warnings* warnings) {
  const Eigen::Index n = time_test.size();
  if (event_test.size() != n || risk_test.size() != n)
    throw NumericalError("uno_cindex: length mismatch");

  if (std::isnan(tau)) {
    tau = -1.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (event_test(i) == 1) tau = std::max(tau, time_test(i));
    if (tau < 0.0) throw NumericalError("uno_cindex: no events in test data");
  }

  Eigen::VectorXi censoring_event(time_train.size());
  for (Eigen::Index i = 0; i < time_train.size(); ++i)
    censoring_event(i) = 1 - event_train(i);
  const StepFunction censor_surv = kaplan_meier(time_train, censoring_event);
  double smallest_positive = 1.0;
  for (double v : censor_surv.values())
    if (v > 0.0) smallest_positive = std::min(smallest_positive, v);

  bool clamped = false;
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (event_test(i) != 1 || time_test(i) > tau) continue;
    double g = censor_surv(time_test(i));
    if (g <= 0.0) {
      g = smallest_positive;
      clamped = true;
    }
    const double w = 1.0 / (g * g);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (time_test(i) >= time_test(j)) continue;
      den += w;
      if (risk_test(i) > risk_test(j))
        num += w;
      else if (risk_test(i) == risk_test(j))
        num += 0.5 * w;
    }
  }
  if (clamped)
    warn(warnings, "uno_cindex: censoring survival reached 0 at an event time; clamped");
  if (den == 0.0) throw NumericalError("uno_cindex: no comparable pairs");
  return num / den;
}

}  // namespace coxntf
