#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coxntf/pipeline.hpp"

namespace coxntf {

// Run-wide configuration with documented defaults; round-trips through JSON.
struct RunConfig {
  std::string dataset_path;
  std::string output_dir = "out";
  std::string time_column = "time";
  std::string event_column = "event";
  std::vector<double> percentiles{10.0, 25.0, 50.0, 75.0, 90.0};
  int fixed_rank = 0;  // 0 = select among rank_candidates
  std::vector<int> rank_candidates{2, 3, 4, 5, 6};
  int rank_repeats = 10;
  double rank_train_fraction = 0.75;
  bool reselect_rank_each_repetition = false;
  double l1_ratio = 0.5;
  int path_length = 100;
  double lambda_min_ratio = 0.0;  // 0 = auto (0.01 if n > p else 0.05)
  double coxnet_tol = 1e-7;
  int coxnet_max_sweeps = 100000;
  double hals_tol = 1e-6;
  int hals_max_iter = 200;
  int n_repeats = 30;
  double train_fraction = 0.6;
  double validation_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = all hardware threads

  CoxnetOptions coxnet_options() const;
  HalsOptions hals_options() const;
  TableSchema table_schema() const;
  BenchmarkConfig benchmark_config() const;
  RankSelectOptions rank_select_options() const;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& text);

std::string coxntf_model_to_json(const CoxntfModel& model, const Scaler& scaler);
// Parsed model plus the preprocessing needed to score raw tables.
struct LoadedModel {
  CoxntfModel model;
  Scaler scaler;
};
LoadedModel coxntf_model_from_json(const std::string& text);

void save_coxntf_model(const CoxntfModel& model, const Scaler& scaler,
                       const std::string& path);
LoadedModel load_coxntf_model(const std::string& path);

std::string benchmark_report_to_json(const BenchmarkReport& report);
std::string benchmark_summary_csv(const BenchmarkReport& report);

}  // namespace coxntf
