#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coxntf/coxnet.hpp"
#include "coxntf/csv.hpp"
#include "coxntf/factor.hpp"
#include "coxntf/surv.hpp"
#include "coxntf/tensorize.hpp"
#include "coxntf/types.hpp"

namespace coxntf {

// Basis learned in the first stage: covariate and temporal patterns of the
// IPCW-weighted event tensor (the sample loadings are discarded).
struct NtfPatterns {
  Eigen::MatrixXd covariate_patterns;  // p x r, unit columns
  Eigen::MatrixXd temporal_patterns;   // q x r, unit columns
};

// Two-stage model: a Coxnet on raw covariates drives the period-probability
// weighting; meta-scores projected onto the fixed basis feed a second Coxnet.
struct CoxntfModel {
  int rank = 0;
  TimeGrid grid;
  Eigen::MatrixXd covariate_patterns;  // p x r
  Eigen::MatrixXd temporal_patterns;   // q x r
  CoxnetModel stage1;  // on raw covariates; the probability engine
  CoxnetModel stage2;  // on meta-scores
  HalsOptions hals;
  std::uint64_t seed = 0;

  Eigen::Index n_features() const { return covariate_patterns.rows(); }
};

struct CoxntfPrediction {
  Eigen::VectorXd risk;          // stage-2 linear predictor
  Eigen::MatrixXd meta_scores;   // n x r
};

NtfPatterns train_ntf_model(const SurvivalDataset& data, const TimeGrid& grid,
                            int rank, const HalsOptions& hals = {},
                            std::uint64_t seed = 0, Warnings* warnings = nullptr);

CoxntfModel train_coxntf(const SurvivalDataset& data, const TimeGrid& grid,
                         const NtfPatterns& patterns,
                         const CoxnetOptions& coxnet_opts = {},
                         const SurvivalDataset* validation = nullptr,
                         const HalsOptions& hals = {}, std::uint64_t seed = 0,
                         Warnings* warnings = nullptr);

// Scores new samples from covariates alone; no survival data is consumed.
CoxntfPrediction predict_coxntf(const CoxntfModel& model, const Eigen::MatrixXd& X_new);

// Component assignment by largest loading. Labels are 1-based; ties take the
// lowest component; an all-zero row gets the unassigned marker 0.
constexpr int kUnassignedCluster = 0;
std::vector<int> cluster_samples(const Eigen::MatrixXd& meta_scores);
std::vector<int> cluster_features(const Eigen::MatrixXd& covariate_patterns);

// ---------------------------------------------------------------------------
// Rank selection (repeated random train/validation partitions).
// ---------------------------------------------------------------------------

struct RankSelectOptions {
  std::vector<int> candidates{2, 3, 4, 5, 6};
  int n_repeats = 10;
  double train_fraction = 0.75;  // remainder is validation
  CoxnetOptions coxnet;
  HalsOptions hals;
};

struct RankSelectResult {
  int chosen_rank = 0;
  std::vector<int> candidates;
  // scores(rep, cand): validation Uno c-index; NaN marks a failed cell
  Eigen::MatrixXd scores;
  std::vector<double> mean_scores;  // per candidate, over non-failed cells
  Warnings warnings;
};

RankSelectResult select_rank(const SurvivalDataset& data, const TimeGrid& grid,
                             const RankSelectOptions& opts, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Benchmark harness (repeated random train/validation/test partitions).
// ---------------------------------------------------------------------------

enum class Arm { Cox, Nmf, Ntf };
std::string arm_name(Arm a);

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct BenchmarkConfig {
  std::vector<Arm> arms{Arm::Cox, Arm::Nmf, Arm::Ntf};
  int n_repeats = 30;
  SplitFractions fractions;
  std::vector<double> percentiles{10.0, 25.0, 50.0, 75.0, 90.0};
  // 0 = select by validation c-index once per dataset; otherwise fixed rank.
  int fixed_rank = 0;
  bool reselect_rank_each_repetition = false;
  RankSelectOptions rank_select;
  CoxnetOptions coxnet;
  HalsOptions hals;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct RepetitionResult {
  int repetition = 0;
  double cindex = std::numeric_limits<double>::quiet_NaN();
  int n_selected = 0;
  bool failed = false;
  std::string error;
};

struct ArmReport {
  Arm arm = Arm::Cox;
  int rank = 0;  // latent rank used (0 for the Cox arm)
  double mean_cindex = std::numeric_limits<double>::quiet_NaN();
  double mean_selected = std::numeric_limits<double>::quiet_NaN();
  std::vector<RepetitionResult> repetitions;
};

struct BenchmarkReport {
  std::string dataset_name;
  Eigen::Index n_samples = 0;
  Eigen::Index n_raw_features = 0;
  BenchmarkConfig config;
  std::vector<ArmReport> arms;
  Warnings warnings;

  const ArmReport* find(Arm a) const;
};

using ProgressFn = std::function<void(const std::string&)>;

// Runs every arm on identical partitions per repetition. Preprocessing
// (dummy coding, min-max scaling) is fitted on each repetition's training
// split and applied to its validation/test splits.
BenchmarkReport benchmark(const RawTable& table, const std::string& dataset_name,
                          const BenchmarkConfig& config, const TableSchema& schema = {},
                          const ProgressFn& progress = nullptr);

// Deterministic per-repetition seed derivation (splitmix64 over a stream id).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace coxntf
