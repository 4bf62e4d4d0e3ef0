#include "coxntf/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace coxntf {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  // splitmix64 finalizer over the master/stream combination
  std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

NtfPatterns train_ntf_model(const SurvivalDataset& data, const TimeGrid& grid,
                            int rank, const HalsOptions& hals, std::uint64_t seed,
                            Warnings* warnings) {
  data.validate();
  const Eigen::VectorXd ipcw = ipcw_weights(data.time, data.event, warnings);
  const Tensor3 tensor = build_event_tensor(data, grid, ipcw);
  Factorization fit = ntf_fit(tensor, rank, hals, seed, warnings);
  return {std::move(fit.covariate_patterns), std::move(fit.temporal_patterns)};
}

namespace {

Eigen::MatrixXd coxntf_meta_scores(const CoxnetModel& stage1, const TimeGrid& grid,
                                   const Eigen::MatrixXd& covariate_patterns,
                                   const Eigen::MatrixXd& temporal_patterns,
                                   const HalsOptions& hals, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd prob = period_event_probability(stage1, X, grid);
  const Tensor3 tensor = build_probability_tensor(X, grid, prob);
  return ntf_transform(tensor, covariate_patterns, temporal_patterns, hals);
}

std::vector<std::string> component_names(int rank) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(rank));
  for (int l = 1; l <= rank; ++l) names.push_back("component_" + std::to_string(l));
  return names;
}

SurvivalDataset meta_score_dataset(const Eigen::MatrixXd& scores,
                                   const SurvivalDataset& source) {
  SurvivalDataset ds;
  ds.X = scores;
  ds.time = source.time;
  ds.event = source.event;
  ds.feature_names = component_names(static_cast<int>(scores.cols()));
  ds.time_unit = source.time_unit;
  return ds;
}

}  // namespace

CoxntfModel train_coxntf(const SurvivalDataset& data, const TimeGrid& grid,
                         const NtfPatterns& patterns, const CoxnetOptions& coxnet_opts,
                         const SurvivalDataset* validation, const HalsOptions& hals,
                         std::uint64_t seed, Warnings* warnings) {
  data.validate();
  if (patterns.covariate_patterns.rows() != data.n_features())
    throw SchemaError("train_coxntf: covariate pattern rows must match features");
  if (patterns.temporal_patterns.rows() != grid.n_periods())
    throw SchemaError("train_coxntf: temporal pattern rows must match grid periods");

  CoxntfModel model;
  model.rank = static_cast<int>(patterns.covariate_patterns.cols());
  model.grid = grid;
  model.covariate_patterns = patterns.covariate_patterns;
  model.temporal_patterns = patterns.temporal_patterns;
  model.hals = hals;
  model.seed = seed;
  model.stage1 = coxnet_fit(data, coxnet_opts, validation, warnings);

  const Eigen::MatrixXd scores =
      coxntf_meta_scores(model.stage1, grid, model.covariate_patterns,
                         model.temporal_patterns, hals, data.X);

  std::vector<int> dead;
  for (Eigen::Index l = 0; l < scores.cols(); ++l)
    if (scores.col(l).maxCoeff() <= 0.0) dead.push_back(static_cast<int>(l) + 1);
  if (static_cast<Eigen::Index>(dead.size()) == scores.cols()) {
    std::ostringstream msg;
    msg << "train_coxntf: all meta-score components are zero (components";
    for (int l : dead) msg << ' ' << l;
    msg << ")";
    throw NumericalError(msg.str());
  }

  SurvivalDataset stage2_data = meta_score_dataset(scores, data);
  if (validation != nullptr) {
    const Eigen::MatrixXd val_scores =
        coxntf_meta_scores(model.stage1, grid, model.covariate_patterns,
                           model.temporal_patterns, hals, validation->X);
    SurvivalDataset stage2_val = meta_score_dataset(val_scores, *validation);
    model.stage2 = coxnet_fit(stage2_data, coxnet_opts, &stage2_val, warnings);
  } else {
    model.stage2 = coxnet_fit(stage2_data, coxnet_opts, nullptr, warnings);
  }
  return model;
}

CoxntfPrediction predict_coxntf(const CoxntfModel& model, const Eigen::MatrixXd& X_new) {
  if (X_new.cols() != model.n_features())
    throw SchemaError("predict_coxntf: expected " + std::to_string(model.n_features()) +
                      " feature columns, got " + std::to_string(X_new.cols()));
  CoxntfPrediction pred;
  pred.meta_scores =
      coxntf_meta_scores(model.stage1, model.grid, model.covariate_patterns,
                         model.temporal_patterns, model.hals, X_new);
  pred.risk = predict_risk(model.stage2, pred.meta_scores);
  return pred;
}

namespace {

std::vector<int> argmax_labels(const Eigen::MatrixXd& m) {
  std::vector<int> labels(static_cast<std::size_t>(m.rows()), kUnassignedCluster);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double best = 0.0;
    int arg = kUnassignedCluster;
    for (Eigen::Index l = 0; l < m.cols(); ++l) {
      if (m(i, l) > best) {
        best = m(i, l);
        arg = static_cast<int>(l) + 1;
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

}  // namespace

std::vector<int> cluster_samples(const Eigen::MatrixXd& meta_scores) {
  if (meta_scores.size() > 0 && meta_scores.minCoeff() < 0.0)
    throw NumericalError("cluster_samples: factor matrix must be nonnegative");
  return argmax_labels(meta_scores);
}

std::vector<int> cluster_features(const Eigen::MatrixXd& covariate_patterns) {
  if (covariate_patterns.size() > 0 && covariate_patterns.minCoeff() < 0.0)
    throw NumericalError("cluster_features: factor matrix must be nonnegative");
  return argmax_labels(covariate_patterns);
}

namespace {

std::vector<std::vector<int>> split_indices(Eigen::Index n,
                                            const std::vector<double>& fractions,
                                            std::uint64_t seed) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  std::vector<std::vector<int>> parts;
  std::size_t start = 0;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    std::size_t count =
        f + 1 == fractions.size()
            ? static_cast<std::size_t>(n) - start
            : static_cast<std::size_t>(std::floor(fractions[f] * static_cast<double>(n)));
    if (count == 0 || start + count > static_cast<std::size_t>(n))
      throw NumericalError("split produced an empty partition");
    parts.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(start),
                       idx.begin() + static_cast<std::ptrdiff_t>(start + count));
    start += count;
  }
  return parts;
}

}  // namespace

RankSelectResult select_rank(const SurvivalDataset& data, const TimeGrid& grid,
                             const RankSelectOptions& opts, std::uint64_t seed) {
  if (opts.candidates.empty())
    throw NumericalError("select_rank: no rank candidates");
  if (!(opts.train_fraction > 0.0 && opts.train_fraction < 1.0))
    throw NumericalError("select_rank: train fraction must lie in (0, 1)");

  RankSelectResult res;
  res.candidates = opts.candidates;
  if (opts.candidates.size() == 1) {  // nothing to compare
    res.chosen_rank = opts.candidates[0];
    return res;
  }

  const int n_cands = static_cast<int>(opts.candidates.size());
  res.scores = Eigen::MatrixXd::Constant(opts.n_repeats, n_cands,
                                         std::numeric_limits<double>::quiet_NaN());

  for (int rep = 0; rep < opts.n_repeats; ++rep) {
    const auto parts =
        split_indices(data.n_samples(), {opts.train_fraction, 1.0 - opts.train_fraction},
                      derive_seed(seed, static_cast<std::uint64_t>(rep)));
    const SurvivalDataset train = data.subset(parts[0]);
    const SurvivalDataset val = data.subset(parts[1]);
    for (int c = 0; c < n_cands; ++c) {
      const std::uint64_t fit_seed =
          derive_seed(seed, 1000 + static_cast<std::uint64_t>(rep) * 64 +
                                static_cast<std::uint64_t>(c));
      try {
        const NtfPatterns patterns = train_ntf_model(train, grid, opts.candidates[c],
                                                     opts.hals, fit_seed, nullptr);
        const CoxntfModel model = train_coxntf(train, grid, patterns, opts.coxnet,
                                               &val, opts.hals, fit_seed, nullptr);
        const CoxntfPrediction pred = predict_coxntf(model, val.X);
        res.scores(rep, c) = uno_cindex(train.time, train.event, val.time, val.event,
                                        pred.risk);
      } catch (const std::exception& e) {
        warn(&res.warnings, "select_rank: repetition " + std::to_string(rep) +
                                ", rank " + std::to_string(opts.candidates[c]) +
                                " failed: " + e.what());
      }
    }
  }

  res.mean_scores.assign(static_cast<std::size_t>(n_cands),
                         std::numeric_limits<double>::quiet_NaN());
  double best_mean = -std::numeric_limits<double>::infinity();
  int best_rank = 0;
  for (int c = 0; c < n_cands; ++c) {
    int ok = 0;
    double sum = 0.0;
    for (int rep = 0; rep < opts.n_repeats; ++rep) {
      if (std::isnan(res.scores(rep, c))) continue;
      sum += res.scores(rep, c);
      ++ok;
    }
    if (ok * 2 < opts.n_repeats) {  // more than half the cells failed
      warn(&res.warnings, "select_rank: rank " + std::to_string(opts.candidates[c]) +
                              " excluded (" + std::to_string(opts.n_repeats - ok) +
                              "/" + std::to_string(opts.n_repeats) + " cells failed)");
      continue;
    }
    const double mean = sum / ok;
    res.mean_scores[static_cast<std::size_t>(c)] = mean;
    if (mean > best_mean ||
        (mean == best_mean && opts.candidates[c] < best_rank)) {
      best_mean = mean;
      best_rank = opts.candidates[c];
    }
  }
  if (best_rank == 0)
    throw NumericalError("select_rank: every rank candidate was excluded");
  res.chosen_rank = best_rank;
  return res;
}

// ---------------------------------------------------------------------------
// Benchmark
// ---------------------------------------------------------------------------

std::string arm_name(Arm a) {
  switch (a) {
    case Arm::Cox: return "COX";
    case Arm::Nmf: return "NMF";
    case Arm::Ntf: return "NTF";
  }
  return "?";
}

const ArmReport* BenchmarkReport::find(Arm a) const {
  for (const auto& r : arms)
    if (r.arm == a) return &r;
  return nullptr;
}

namespace {

constexpr std::uint64_t kRankSelectStream = 1ULL << 40;
constexpr std::uint64_t kNmfRankSelectStream = (1ULL << 40) + 1;
constexpr std::uint64_t kRepetitionStream = 1ULL << 41;

struct RepetitionData {
  SurvivalDataset train, validation, test;
  TimeGrid grid;
};

RepetitionData prepare_repetition(const RawTable& table, const TableSchema& schema,
                                  const BenchmarkConfig& config, int rep) {
  const auto parts = split_indices(
      static_cast<Eigen::Index>(table.n_rows()),
      {config.fractions.train, config.fractions.validation, config.fractions.test},
      derive_seed(config.seed, kRepetitionStream + static_cast<std::uint64_t>(rep)));

  const PreprocessResult pre = preprocess(table.subset_rows(parts[0]), schema);
  RepetitionData data;
  data.train = pre.dataset;
  data.validation = pre.scaler.transform(table.subset_rows(parts[1]));
  data.test = pre.scaler.transform(table.subset_rows(parts[2]));
  data.grid = time_grid_from_percentiles(data.train.time, config.percentiles);
  return data;
}

RepetitionResult run_cox_arm(const RepetitionData& d, const BenchmarkConfig& config) {
  RepetitionResult r;
  const CoxnetModel model = coxnet_fit(d.train, config.coxnet, &d.validation);
  const Eigen::VectorXd risk = predict_risk(model, d.test.X);
  r.cindex = uno_cindex(d.train.time, d.train.event, d.test.time, d.test.event, risk);
  r.n_selected = n_selected_features(model);
  return r;
}

RepetitionResult run_nmf_arm(const RepetitionData& d, const BenchmarkConfig& config,
                             int rank, std::uint64_t fit_seed) {
  RepetitionResult r;
  const NmfFactorization nmf = nmf_fit(d.train.X, rank, config.hals, fit_seed);
  SurvivalDataset train2 = meta_score_dataset(nmf.meta_scores, d.train);
  SurvivalDataset val2 = meta_score_dataset(
      nmf_transform(d.validation.X, nmf.covariate_patterns, config.hals), d.validation);
  const CoxnetModel model = coxnet_fit(train2, config.coxnet, &val2);
  const Eigen::MatrixXd test_scores =
      nmf_transform(d.test.X, nmf.covariate_patterns, config.hals);
  const Eigen::VectorXd risk = predict_risk(model, test_scores);
  r.cindex = uno_cindex(d.train.time, d.train.event, d.test.time, d.test.event, risk);
  r.n_selected = n_selected_features(model);
  return r;
}

RepetitionResult run_ntf_arm(const RepetitionData& d, const BenchmarkConfig& config,
                             int rank, std::uint64_t fit_seed) {
  RepetitionResult r;
  const NtfPatterns patterns =
      train_ntf_model(d.train, d.grid, rank, config.hals, fit_seed);
  const CoxntfModel model = train_coxntf(d.train, d.grid, patterns, config.coxnet,
                                         &d.validation, config.hals, fit_seed);
  const CoxntfPrediction pred = predict_coxntf(model, d.test.X);
  r.cindex =
      uno_cindex(d.train.time, d.train.event, d.test.time, d.test.event, pred.risk);
  r.n_selected = n_selected_features(model.stage2);
  return r;
}

// Validation c-index per rank candidate within one repetition; used when
// ranks are re-selected inside every repetition.
int reselect_rank_ntf(const RepetitionData& d, const BenchmarkConfig& config,
                      std::uint64_t seed) {
  double best = -std::numeric_limits<double>::infinity();
  int best_rank = 0;
  int c = 0;
  for (int rank : config.rank_select.candidates) {
    const std::uint64_t fit_seed = derive_seed(seed, static_cast<std::uint64_t>(c++));
    try {
      const NtfPatterns patterns =
          train_ntf_model(d.train, d.grid, rank, config.hals, fit_seed);
      const CoxntfModel model = train_coxntf(d.train, d.grid, patterns, config.coxnet,
                                             &d.validation, config.hals, fit_seed);
      const CoxntfPrediction pred = predict_coxntf(model, d.validation.X);
      const double ci = uno_cindex(d.train.time, d.train.event, d.validation.time,
                                   d.validation.event, pred.risk);
      if (ci > best || (ci == best && rank < best_rank)) {
        best = ci;
        best_rank = rank;
      }
    } catch (const std::exception&) {
    }
  }
  if (best_rank == 0)
    throw NumericalError("rank reselection failed for every candidate");
  return best_rank;
}

int reselect_rank_nmf(const RepetitionData& d, const BenchmarkConfig& config,
                      std::uint64_t seed) {
  double best = -std::numeric_limits<double>::infinity();
  int best_rank = 0;
  int c = 0;
  for (int rank : config.rank_select.candidates) {
    const std::uint64_t fit_seed = derive_seed(seed, static_cast<std::uint64_t>(c++));
    try {
      const NmfFactorization nmf = nmf_fit(d.train.X, rank, config.hals, fit_seed);
      SurvivalDataset train2 = meta_score_dataset(nmf.meta_scores, d.train);
      SurvivalDataset val2 = meta_score_dataset(
          nmf_transform(d.validation.X, nmf.covariate_patterns, config.hals),
          d.validation);
      const CoxnetModel model = coxnet_fit(train2, config.coxnet, &val2);
      const Eigen::VectorXd risk = predict_risk(model, val2.X);
      const double ci = uno_cindex(d.train.time, d.train.event, d.validation.time,
                                   d.validation.event, risk);
      if (ci > best || (ci == best && rank < best_rank)) {
        best = ci;
        best_rank = rank;
      }
    } catch (const std::exception&) {
    }
  }
  if (best_rank == 0)
    throw NumericalError("rank reselection failed for every candidate");
  return best_rank;
}

// Once-per-dataset NMF rank selection, mirroring select_rank for symmetry
// between the two latent-factor arms.
int select_rank_nmf_once(const SurvivalDataset& data, const RankSelectOptions& opts,
                         std::uint64_t seed, Warnings* warnings) {
  if (opts.candidates.size() == 1) return opts.candidates[0];
  const int n_cands = static_cast<int>(opts.candidates.size());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Constant(
      opts.n_repeats, n_cands, std::numeric_limits<double>::quiet_NaN());

  for (int rep = 0; rep < opts.n_repeats; ++rep) {
    const auto parts =
        split_indices(data.n_samples(), {opts.train_fraction, 1.0 - opts.train_fraction},
                      derive_seed(seed, static_cast<std::uint64_t>(rep)));
    const SurvivalDataset train = data.subset(parts[0]);
    const SurvivalDataset val = data.subset(parts[1]);
    for (int c = 0; c < n_cands; ++c) {
      const std::uint64_t fit_seed =
          derive_seed(seed, 1000 + static_cast<std::uint64_t>(rep) * 64 +
                                static_cast<std::uint64_t>(c));
      try {
        const NmfFactorization nmf =
            nmf_fit(train.X, opts.candidates[c], opts.hals, fit_seed);
        SurvivalDataset train2 = meta_score_dataset(nmf.meta_scores, train);
        SurvivalDataset val2 = meta_score_dataset(
            nmf_transform(val.X, nmf.covariate_patterns, opts.hals), val);
        const CoxnetModel model = coxnet_fit(train2, opts.coxnet, &val2);
        const Eigen::VectorXd risk = predict_risk(model, val2.X);
        scores(rep, c) = uno_cindex(train.time, train.event, val.time, val.event, risk);
      } catch (const std::exception& e) {
        warn(warnings, "nmf rank selection: repetition " + std::to_string(rep) +
                           ", rank " + std::to_string(opts.candidates[c]) +
                           " failed: " + e.what());
      }
    }
  }

  double best_mean = -std::numeric_limits<double>::infinity();
  int best_rank = 0;
  for (int c = 0; c < n_cands; ++c) {
    int ok = 0;
    double sum = 0.0;
    for (int rep = 0; rep < opts.n_repeats; ++rep)
      if (!std::isnan(scores(rep, c))) {
        sum += scores(rep, c);
        ++ok;
      }
    if (ok * 2 < opts.n_repeats) continue;
    const double mean = sum / ok;
    if (mean > best_mean || (mean == best_mean && opts.candidates[c] < best_rank)) {
      best_mean = mean;
      best_rank = opts.candidates[c];
    }
  }
  if (best_rank == 0)
    throw NumericalError("nmf rank selection: every candidate was excluded");
  return best_rank;
}

}  // namespace

BenchmarkReport benchmark(const RawTable& table, const std::string& dataset_name,
                          const BenchmarkConfig& config, const TableSchema& schema,
                          const ProgressFn& progress) {
  if (config.n_repeats < 1) throw NumericalError("benchmark: n_repeats must be >= 1");
  const double fsum =
      config.fractions.train + config.fractions.validation + config.fractions.test;
  if (std::abs(fsum - 1.0) > 1e-9)
    throw NumericalError("benchmark: split fractions must sum to 1");

  BenchmarkReport report;
  report.dataset_name = dataset_name;
  report.n_samples = static_cast<Eigen::Index>(table.n_rows());
  report.config = config;

  const bool wants_ntf = std::count(config.arms.begin(), config.arms.end(), Arm::Ntf);
  const bool wants_nmf = std::count(config.arms.begin(), config.arms.end(), Arm::Nmf);

  // Rank policy: fixed, once per dataset, or reselected per repetition.
  int rank_ntf = config.fixed_rank, rank_nmf = config.fixed_rank;
  if (config.fixed_rank == 0 && !config.reselect_rank_each_repetition &&
      (wants_ntf || wants_nmf)) {
    const PreprocessResult pre = preprocess(table, schema);
    report.n_raw_features = pre.dataset.n_features();
    RankSelectOptions rs = config.rank_select;
    rs.coxnet = config.coxnet;
    rs.hals = config.hals;
    int max_rank = static_cast<int>(pre.dataset.n_features());
    std::vector<int> capped;
    for (int r : rs.candidates)
      if (r <= max_rank) capped.push_back(r);
    if (capped.empty()) capped.push_back(max_rank);
    rs.candidates = capped;
    if (wants_ntf) {
      const TimeGrid grid = time_grid_from_percentiles(pre.dataset.time,
                                                       config.percentiles);
      RankSelectResult sel = select_rank(pre.dataset, grid, rs,
                                         derive_seed(config.seed, kRankSelectStream));
      rank_ntf = sel.chosen_rank;
      for (const auto& w : sel.warnings) warn(&report.warnings, w);
      if (progress) progress("rank selection (NTF): chose " + std::to_string(rank_ntf));
    }
    if (wants_nmf) {
      rank_nmf = select_rank_nmf_once(pre.dataset, rs,
                                      derive_seed(config.seed, kNmfRankSelectStream),
                                      &report.warnings);
      if (progress) progress("rank selection (NMF): chose " + std::to_string(rank_nmf));
    }
  } else {
    const PreprocessResult pre = preprocess(table, schema);
    report.n_raw_features = pre.dataset.n_features();
  }

  report.arms.resize(config.arms.size());
  for (std::size_t a = 0; a < config.arms.size(); ++a) {
    report.arms[a].arm = config.arms[a];
    report.arms[a].rank = config.arms[a] == Arm::Cox
                              ? 0
                              : (config.arms[a] == Arm::Ntf ? rank_ntf : rank_nmf);
    report.arms[a].repetitions.resize(static_cast<std::size_t>(config.n_repeats));
  }

  std::mutex progress_mutex;
  std::atomic<int> next_rep{0};
  auto worker = [&]() {
    for (;;) {
      const int rep = next_rep.fetch_add(1);
      if (rep >= config.n_repeats) return;

      std::vector<RepetitionResult> results(config.arms.size());
      for (auto& r : results) r.repetition = rep;
      try {
        const RepetitionData data = prepare_repetition(table, schema, config, rep);
        int rep_rank_ntf = rank_ntf, rep_rank_nmf = rank_nmf;
        if (config.fixed_rank == 0 && config.reselect_rank_each_repetition) {
          if (wants_ntf)
            rep_rank_ntf = reselect_rank_ntf(
                data, config,
                derive_seed(config.seed, kRankSelectStream + 2 +
                                             static_cast<std::uint64_t>(rep) * 2));
          if (wants_nmf)
            rep_rank_nmf = reselect_rank_nmf(
                data, config,
                derive_seed(config.seed, kRankSelectStream + 3 +
                                             static_cast<std::uint64_t>(rep) * 2));
        }
        for (std::size_t a = 0; a < config.arms.size(); ++a) {
          const std::uint64_t fit_seed =
              derive_seed(config.seed, static_cast<std::uint64_t>(rep) * 8 + a);
          try {
            switch (config.arms[a]) {
              case Arm::Cox:
                results[a] = run_cox_arm(data, config);
                break;
              case Arm::Nmf:
                results[a] = run_nmf_arm(data, config, rep_rank_nmf, fit_seed);
                break;
              case Arm::Ntf:
                results[a] = run_ntf_arm(data, config, rep_rank_ntf, fit_seed);
                break;
            }
          } catch (const std::exception& e) {
            results[a].failed = true;
            results[a].error = e.what();
          }
          results[a].repetition = rep;
        }
      } catch (const std::exception& e) {
        for (auto& r : results) {
          r.failed = true;
          r.error = e.what();
        }
      }

      for (std::size_t a = 0; a < config.arms.size(); ++a)
        report.arms[a].repetitions[static_cast<std::size_t>(rep)] = results[a];

      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        std::ostringstream msg;
        msg << "repetition " << rep + 1 << "/" << config.n_repeats;
        for (std::size_t a = 0; a < config.arms.size(); ++a) {
          msg << "  " << arm_name(config.arms[a]) << "=";
          if (results[a].failed)
            msg << "failed";
          else
            msg << results[a].cindex;
        }
        progress(msg.str());
      }
    }
  };

  const int n_workers = std::max(1, std::min(config.workers, config.n_repeats));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  for (auto& armrep : report.arms) {
    double ci_sum = 0.0, sel_sum = 0.0;
    int ok = 0;
    for (const auto& r : armrep.repetitions) {
      if (r.failed) {
        warn(&report.warnings, arm_name(armrep.arm) + " repetition " +
                                   std::to_string(r.repetition) + " failed: " + r.error);
        continue;
      }
      ci_sum += r.cindex;
      sel_sum += r.n_selected;
      ++ok;
    }
    if (ok > 0) {
      armrep.mean_cindex = ci_sum / ok;
      armrep.mean_selected = sel_sum / ok;
    }
  }
  return report;
}

}  // namespace coxntf
