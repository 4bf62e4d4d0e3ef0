#include "coxntf/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace coxntf {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array()) throw SchemaError("model JSON: expected a matrix");
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) return {};
  const Eigen::Index p = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != p)
      throw SchemaError("model JSON: ragged matrix");
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

json step_function_to_json(const StepFunction& f) {
  return {{"knots", f.knots()},
          {"values", f.values()},
          {"value_before_first_knot", f.value_before_first_knot()}};
}

StepFunction step_function_from_json(const json& j) {
  return StepFunction(j.at("knots").get<std::vector<double>>(),
                      j.at("values").get<std::vector<double>>(),
                      j.at("value_before_first_knot").get<double>());
}

json scaler_to_json(const Scaler& s) {
  json cols = json::array();
  for (const auto& c : s.columns) {
    json col{{"name", c.name}};
    if (c.kind == ColumnScaler::Kind::Numeric) {
      col["kind"] = "numeric";
      col["min"] = c.min;
      col["max"] = c.max;
    } else {
      col["kind"] = "categorical";
      col["levels"] = c.levels;
    }
    cols.push_back(std::move(col));
  }
  return {{"time_column", s.schema.time_column},
          {"event_column", s.schema.event_column},
          {"columns", cols},
          {"feature_names", s.feature_names}};
}

Scaler scaler_from_json(const json& j) {
  Scaler s;
  s.schema.time_column = j.at("time_column").get<std::string>();
  s.schema.event_column = j.at("event_column").get<std::string>();
  for (const auto& col : j.at("columns")) {
    ColumnScaler c;
    c.name = col.at("name").get<std::string>();
    if (col.at("kind").get<std::string>() == "numeric") {
      c.kind = ColumnScaler::Kind::Numeric;
      c.min = col.at("min").get<double>();
      c.max = col.at("max").get<double>();
    } else {
      c.kind = ColumnScaler::Kind::Categorical;
      c.levels = col.at("levels").get<std::vector<std::string>>();
    }
    s.columns.push_back(std::move(c));
  }
  s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  return s;
}

json coxnet_to_json(const CoxnetModel& m) {
  return {{"beta", vector_to_json(m.beta)},
          {"l1_ratio", m.l1_ratio},
          {"lambda", m.lambda},
          {"lambda_path", m.lambda_path},
          {"baseline_cum_hazard", step_function_to_json(m.baseline_cum_hazard)},
          {"feature_names", m.feature_names},
          {"converged", m.converged}};
}

CoxnetModel coxnet_from_json(const json& j) {
  CoxnetModel m;
  m.beta = vector_from_json(j.at("beta"));
  m.l1_ratio = j.at("l1_ratio").get<double>();
  m.lambda = j.at("lambda").get<double>();
  m.lambda_path = j.at("lambda_path").get<std::vector<double>>();
  m.baseline_cum_hazard = step_function_from_json(j.at("baseline_cum_hazard"));
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

}  // namespace

CoxnetOptions RunConfig::coxnet_options() const {
  CoxnetOptions o;
  o.l1_ratio = l1_ratio;
  o.path_length = path_length;
  o.lambda_min_ratio = lambda_min_ratio;
  o.tol = coxnet_tol;
  o.max_sweeps = coxnet_max_sweeps;
  return o;
}

HalsOptions RunConfig::hals_options() const { return {hals_max_iter, hals_tol}; }

TableSchema RunConfig::table_schema() const { return {time_column, event_column}; }

RankSelectOptions RunConfig::rank_select_options() const {
  RankSelectOptions o;
  o.candidates = fixed_rank > 0 ? std::vector<int>{fixed_rank} : rank_candidates;
  o.n_repeats = rank_repeats;
  o.train_fraction = rank_train_fraction;
  o.coxnet = coxnet_options();
  o.hals = hals_options();
  return o;
}

BenchmarkConfig RunConfig::benchmark_config() const {
  BenchmarkConfig c;
  c.n_repeats = n_repeats;
  c.fractions = {train_fraction, validation_fraction, test_fraction};
  c.percentiles = percentiles;
  c.fixed_rank = fixed_rank;
  c.reselect_rank_each_repetition = reselect_rank_each_repetition;
  c.rank_select = rank_select_options();
  c.coxnet = coxnet_options();
  c.hals = hals_options();
  c.seed = seed;
  c.workers = workers;
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json j{{"dataset_path", c.dataset_path},
         {"output_dir", c.output_dir},
         {"time_column", c.time_column},
         {"event_column", c.event_column},
         {"percentiles", c.percentiles},
         {"fixed_rank", c.fixed_rank},
         {"rank_candidates", c.rank_candidates},
         {"rank_repeats", c.rank_repeats},
         {"rank_train_fraction", c.rank_train_fraction},
         {"reselect_rank_each_repetition", c.reselect_rank_each_repetition},
         {"l1_ratio", c.l1_ratio},
         {"path_length", c.path_length},
         {"lambda_min_ratio", c.lambda_min_ratio},
         {"coxnet_tol", c.coxnet_tol},
         {"coxnet_max_sweeps", c.coxnet_max_sweeps},
         {"hals_tol", c.hals_tol},
         {"hals_max_iter", c.hals_max_iter},
         {"n_repeats", c.n_repeats},
         {"train_fraction", c.train_fraction},
         {"validation_fraction", c.validation_fraction},
         {"test_fraction", c.test_fraction},
         {"seed", c.seed},
         {"workers", c.workers}};
  return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config JSON parse error: ") + e.what());
  }
  RunConfig d;  // defaults
  RunConfig c;
  c.dataset_path = j.value("dataset_path", d.dataset_path);
  c.output_dir = j.value("output_dir", d.output_dir);
  c.time_column = j.value("time_column", d.time_column);
  c.event_column = j.value("event_column", d.event_column);
  c.percentiles = j.value("percentiles", d.percentiles);
  c.fixed_rank = j.value("fixed_rank", d.fixed_rank);
  c.rank_candidates = j.value("rank_candidates", d.rank_candidates);
  c.rank_repeats = j.value("rank_repeats", d.rank_repeats);
  c.rank_train_fraction = j.value("rank_train_fraction", d.rank_train_fraction);
  c.reselect_rank_each_repetition =
      j.value("reselect_rank_each_repetition", d.reselect_rank_each_repetition);
  c.l1_ratio = j.value("l1_ratio", d.l1_ratio);
  c.path_length = j.value("path_length", d.path_length);
  c.lambda_min_ratio = j.value("lambda_min_ratio", d.lambda_min_ratio);
  c.coxnet_tol = j.value("coxnet_tol", d.coxnet_tol);
  c.coxnet_max_sweeps = j.value("coxnet_max_sweeps", d.coxnet_max_sweeps);
  c.hals_tol = j.value("hals_tol", d.hals_tol);
  c.hals_max_iter = j.value("hals_max_iter", d.hals_max_iter);
  c.n_repeats = j.value("n_repeats", d.n_repeats);
  c.train_fraction = j.value("train_fraction", d.train_fraction);
  c.validation_fraction = j.value("validation_fraction", d.validation_fraction);
  c.test_fraction = j.value("test_fraction", d.test_fraction);
  c.seed = j.value("seed", d.seed);
  c.workers = j.value("workers", d.workers);
  return c;
}

std::string coxntf_model_to_json(const CoxntfModel& model, const Scaler& scaler) {
  json j{{"format", "coxntf-model"},
         {"version", 1},
         {"rank", model.rank},
         {"grid_interior_boundaries", model.grid.interior()},
         {"covariate_patterns", matrix_to_json(model.covariate_patterns)},
         {"temporal_patterns", matrix_to_json(model.temporal_patterns)},
         {"hals", {{"max_iter", model.hals.max_iter}, {"tol", model.hals.tol}}},
         {"seed", model.seed},
         {"stage1_coxnet", coxnet_to_json(model.stage1)},
         {"stage2_coxnet", coxnet_to_json(model.stage2)},
         {"scaler", scaler_to_json(scaler)}};
  return j.dump(2) + "\n";
}

LoadedModel coxntf_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("model JSON parse error: ") + e.what());
  }
  if (j.value("format", "") != "coxntf-model")
    throw SchemaError("model JSON: unrecognized format");
  LoadedModel out;
  out.model.rank = j.at("rank").get<int>();
  std::vector<double> bounds{0.0};
  for (double b : j.at("grid_interior_boundaries").get<std::vector<double>>())
    bounds.push_back(b);
  bounds.push_back(std::numeric_limits<double>::infinity());
  out.model.grid = TimeGrid(std::move(bounds));
  out.model.covariate_patterns = matrix_from_json(j.at("covariate_patterns"));
  out.model.temporal_patterns = matrix_from_json(j.at("temporal_patterns"));
  out.model.hals.max_iter = j.at("hals").at("max_iter").get<int>();
  out.model.hals.tol = j.at("hals").at("tol").get<double>();
  out.model.seed = j.at("seed").get<std::uint64_t>();
  out.model.stage1 = coxnet_from_json(j.at("stage1_coxnet"));
  out.model.stage2 = coxnet_from_json(j.at("stage2_coxnet"));
  out.scaler = scaler_from_json(j.at("scaler"));
  out.model.stage1.scaler = out.scaler;
  return out;
}

void save_coxntf_model(const CoxntfModel& model, const Scaler& scaler,
                       const std::string& path) {
  atomic_write_file(path, coxntf_model_to_json(model, scaler));
}

LoadedModel load_coxntf_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return coxntf_model_from_json(buf.str());
}

std::string benchmark_report_to_json(const BenchmarkReport& report) {
  json arms = json::array();
  for (const auto& arm : report.arms) {
    json reps = json::array();
    for (const auto& r : arm.repetitions) {
      json rep{{"repetition", r.repetition}, {"failed", r.failed}};
      if (r.failed) {
        rep["error"] = r.error;
      } else {
        rep["cindex"] = r.cindex;
        rep["n_selected"] = r.n_selected;
      }
      reps.push_back(std::move(rep));
    }
    json a{{"arm", arm_name(arm.arm)},
           {"rank", arm.rank},
           {"repetitions", reps}};
    if (!std::isnan(arm.mean_cindex)) {
      a["mean_cindex"] = arm.mean_cindex;
      a["mean_selected"] = arm.mean_selected;
    }
    arms.push_back(std::move(a));
  }
  const auto& c = report.config;
  json j{{"dataset", report.dataset_name},
         {"n_samples", report.n_samples},
         {"n_features_encoded", report.n_raw_features},
         {"config",
          {{"n_repeats", c.n_repeats},
           {"fractions", {c.fractions.train, c.fractions.validation, c.fractions.test}},
           {"percentiles", c.percentiles},
           {"fixed_rank", c.fixed_rank},
           {"reselect_rank_each_repetition", c.reselect_rank_each_repetition},
           {"rank_candidates", c.rank_select.candidates},
           {"l1_ratio", c.coxnet.l1_ratio},
           {"path_length", c.coxnet.path_length},
           {"seed", c.seed}}},
         {"arms", arms},
         {"warnings", report.warnings}};
  return j.dump(2) + "\n";
}

std::string benchmark_summary_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "dataset,approach,average_n_features,c_index\n";
  for (const auto& arm : report.arms) {
    out << report.dataset_name << ',' << arm_name(arm.arm) << ',';
    if (std::isnan(arm.mean_selected))
      out << "NA,NA\n";
    else
      out << format_double(arm.mean_selected) << ',' << format_double(arm.mean_cindex)
          << '\n';
  }
  return out.str();
}

}  // namespace coxntf
