#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "coxntf/model_io.hpp"
#include "coxntf/pipeline.hpp"

namespace fs = std::filesystem;
using namespace coxntf;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_warnings(const Warnings& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<std::string> index_labels(Eigen::Index n) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  return labels;
}

std::vector<std::string> component_labels(int rank) {
  std::vector<std::string> labels;
  for (int l = 1; l <= rank; ++l) labels.push_back("component_" + std::to_string(l));
  return labels;
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string labels_csv(const std::vector<std::string>& names,
                       const std::vector<int>& labels, const std::string& id_col) {
  std::ostringstream out;
  out << id_col << ",cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << names[i] << ',' << labels[i] << '\n';
  return out.str();
}

int run_fit(const RunConfig& cfg) {
  const RawTable table = read_csv(cfg.dataset_path);
  Warnings warnings;
  const PreprocessResult pre = preprocess(table, cfg.table_schema());
  print_warnings(pre.warnings);

  const TimeGrid grid =
      time_grid_from_percentiles(pre.dataset.time, cfg.percentiles, &warnings);

  int rank = cfg.fixed_rank;
  if (rank == 0) {
    RankSelectOptions rs = cfg.rank_select_options();
    const int max_rank = static_cast<int>(pre.dataset.n_features());
    std::vector<int> capped;
    for (int r : rs.candidates)
      if (r <= max_rank) capped.push_back(r);
    rs.candidates = capped.empty() ? std::vector<int>{max_rank} : capped;
    const RankSelectResult sel =
        select_rank(pre.dataset, grid, rs, derive_seed(cfg.seed, 7001));
    print_warnings(sel.warnings);
    rank = sel.chosen_rank;
    std::cerr << "selected rank " << rank << "\n";
  }

  const std::uint64_t fit_seed = derive_seed(cfg.seed, 7002);
  const NtfPatterns patterns = train_ntf_model(pre.dataset, grid, rank,
                                               cfg.hals_options(), fit_seed, &warnings);
  const CoxntfModel model =
      train_coxntf(pre.dataset, grid, patterns, cfg.coxnet_options(), nullptr,
                   cfg.hals_options(), fit_seed, &warnings);
  print_warnings(warnings);

  const CoxntfPrediction train_pred = predict_coxntf(model, pre.dataset.X);

  save_coxntf_model(model, pre.scaler, join_path(cfg.output_dir, "model.json"));
  atomic_write_file(join_path(cfg.output_dir, "meta_scores.csv"),
                    matrix_to_csv(train_pred.meta_scores, component_labels(rank),
                                  index_labels(pre.dataset.n_samples())));
  atomic_write_file(join_path(cfg.output_dir, "covariate_patterns.csv"),
                    matrix_to_csv(model.covariate_patterns, component_labels(rank),
                                  pre.scaler.feature_names, "feature"));
  {
    std::ostringstream out;
    out << "period,start,end";
    for (int l = 1; l <= rank; ++l) out << ",component_" << l;
    out << '\n';
    const auto& bounds = grid.boundaries();
    for (int k = 0; k < grid.n_periods(); ++k) {
      out << k + 1 << ',' << format_double(bounds[static_cast<std::size_t>(k)]) << ','
          << format_double(bounds[static_cast<std::size_t>(k) + 1]);
      for (int l = 0; l < rank; ++l)
        out << ',' << format_double(model.temporal_patterns(k, l));
      out << '\n';
    }
    atomic_write_file(join_path(cfg.output_dir, "temporal_patterns.csv"), out.str());
  }
  atomic_write_file(join_path(cfg.output_dir, "sample_clusters.csv"),
                    labels_csv(index_labels(pre.dataset.n_samples()),
                               cluster_samples(train_pred.meta_scores), "row"));
  atomic_write_file(join_path(cfg.output_dir, "feature_clusters.csv"),
                    labels_csv(pre.scaler.feature_names,
                               cluster_features(model.covariate_patterns), "feature"));
  RunConfig effective = cfg;
  effective.fixed_rank = rank;
  atomic_write_file(join_path(cfg.output_dir, "effective_config.json"),
                    run_config_to_json(effective));
  std::cerr << "fit complete: rank " << rank << ", stage-2 selected "
            << n_selected_features(model.stage2) << " component(s)\n";
  return 0;
}

int run_predict(const RunConfig& cfg, const std::string& model_path) {
  const LoadedModel loaded = load_coxntf_model(model_path);
  const RawTable table = read_csv(cfg.dataset_path);
  Warnings warnings;
  const Eigen::MatrixXd X = loaded.scaler.transform_features(table, &warnings);
  print_warnings(warnings);

  const CoxntfPrediction pred = predict_coxntf(loaded.model, X);

  std::ostringstream out;
  out << "row,risk";
  for (int l = 1; l <= loaded.model.rank; ++l) out << ",component_" << l;
  out << '\n';
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    out << i + 1 << ',' << format_double(pred.risk(i));
    for (int l = 0; l < loaded.model.rank; ++l)
      out << ',' << format_double(pred.meta_scores(i, l));
    out << '\n';
  }
  atomic_write_file(join_path(cfg.output_dir, "risk_scores.csv"), out.str());
  return 0;
}

int run_benchmark(const RunConfig& cfg) {
  const RawTable table = read_csv(cfg.dataset_path);
  const std::string name = fs::path(cfg.dataset_path).stem().string();
  BenchmarkConfig bc = cfg.benchmark_config();
  bc.workers = resolve_workers(bc.workers);

  const BenchmarkReport report =
      benchmark(table, name, bc, cfg.table_schema(),
                [](const std::string& msg) { std::cerr << msg << "\n"; });
  print_warnings(report.warnings);

  atomic_write_file(join_path(cfg.output_dir, "benchmark_report.json"),
                    benchmark_report_to_json(report));
  atomic_write_file(join_path(cfg.output_dir, "benchmark_summary.csv"),
                    benchmark_summary_csv(report));
  atomic_write_file(join_path(cfg.output_dir, "effective_config.json"),
                    run_config_to_json(cfg));
  std::cout << benchmark_summary_csv(report);
  return 0;
}

int run_rank_select(const RunConfig& cfg) {
  const RawTable table = read_csv(cfg.dataset_path);
  const PreprocessResult pre = preprocess(table, cfg.table_schema());
  print_warnings(pre.warnings);
  const TimeGrid grid = time_grid_from_percentiles(pre.dataset.time, cfg.percentiles);

  RankSelectOptions rs = cfg.rank_select_options();
  const RankSelectResult sel =
      select_rank(pre.dataset, grid, rs, derive_seed(cfg.seed, 7001));
  print_warnings(sel.warnings);

  std::ostringstream out;
  out << "repetition";
  for (int r : sel.candidates) out << ",rank_" << r;
  out << '\n';
  for (Eigen::Index rep = 0; rep < sel.scores.rows(); ++rep) {
    out << rep + 1;
    for (Eigen::Index c = 0; c < sel.scores.cols(); ++c)
      out << ',' << format_double(sel.scores(rep, c));
    out << '\n';
  }
  atomic_write_file(join_path(cfg.output_dir, "rank_scores.csv"), out.str());
  std::cout << "chosen_rank," << sel.chosen_rank << "\n";
  return 0;
}

int run_export_patterns(const RunConfig& cfg, const std::string& model_path) {
  const LoadedModel loaded = load_coxntf_model(model_path);
  const CoxntfModel& model = loaded.model;
  const auto& names = loaded.scaler.feature_names;

  {  // covariate loadings, ranked within each component
    std::ostringstream out;
    out << "component,position,feature,loading\n";
    for (int l = 0; l < model.rank; ++l) {
      std::vector<int> order(static_cast<std::size_t>(model.n_features()));
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return model.covariate_patterns(a, l) > model.covariate_patterns(b, l);
      });
      for (std::size_t pos = 0; pos < order.size(); ++pos)
        out << l + 1 << ',' << pos + 1 << ',' << names[static_cast<std::size_t>(order[pos])]
            << ',' << format_double(model.covariate_patterns(order[pos], l)) << '\n';
    }
    atomic_write_file(join_path(cfg.output_dir, "patterns.csv"), out.str());
  }
  {  // temporal profiles
    std::ostringstream out;
    out << "component,period,start,end,weight\n";
    const auto& bounds = model.grid.boundaries();
    for (int l = 0; l < model.rank; ++l)
      for (int k = 0; k < model.grid.n_periods(); ++k)
        out << l + 1 << ',' << k + 1 << ','
            << format_double(bounds[static_cast<std::size_t>(k)]) << ','
            << format_double(bounds[static_cast<std::size_t>(k) + 1]) << ','
            << format_double(model.temporal_patterns(k, l)) << '\n';
    atomic_write_file(join_path(cfg.output_dir, "temporal_profiles.csv"), out.str());
  }
  {  // stage-1 hazard ratios
    std::ostringstream out;
    out << "feature,hazard_ratio\n";
    for (Eigen::Index j = 0; j < model.stage1.beta.size(); ++j)
      out << names[static_cast<std::size_t>(j)] << ','
          << format_double(std::exp(model.stage1.beta(j))) << '\n';
    atomic_write_file(join_path(cfg.output_dir, "hazard_ratios.csv"), out.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // --config is applied first so explicit flags can override its values.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        cfg = run_config_from_json(read_file(argv[i + 1]));
      } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }
  }

  CLI::App app{"CoxNTF: survival-guided nonnegative tensor factorization toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON configuration file");

  std::string model_path;
  auto add_common = [&](CLI::App* cmd, bool needs_data, bool needs_model) {
    if (needs_data)
      cmd->add_option("--data", cfg.dataset_path, "dataset CSV path")
          ->required(cfg.dataset_path.empty());
    if (needs_model)
      cmd->add_option("--model", model_path, "model.json path")->required();
    cmd->add_option("--out", cfg.output_dir, "output directory");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--workers", cfg.workers, "parallel workers (0 = all cores)");
    cmd->add_option("--time-column", cfg.time_column, "time column name");
    cmd->add_option("--event-column", cfg.event_column, "event column name");
    cmd->add_option("--percentiles", cfg.percentiles,
                    "interior grid percentiles, strictly increasing");
    cmd->add_option("--rank", cfg.fixed_rank, "fixed NTF rank (0 = select)");
    cmd->add_option("--rank-candidates", cfg.rank_candidates, "candidate ranks");
    cmd->add_option("--rank-repeats", cfg.rank_repeats, "rank-selection repetitions");
    cmd->add_option("--l1-ratio", cfg.l1_ratio, "elastic-net mixing in (0,1]");
    cmd->add_option("--path-length", cfg.path_length, "lambda path length");
    cmd->add_option("--lambda-min-ratio", cfg.lambda_min_ratio,
                    "smallest lambda as a fraction of lambda_max (0 = auto)");
    cmd->add_option("--hals-tol", cfg.hals_tol, "HALS stopping tolerance");
    cmd->add_option("--hals-max-iter", cfg.hals_max_iter, "HALS sweep limit");
    cmd->add_option("--repeats", cfg.n_repeats, "benchmark repetitions");
    cmd->add_option("--train-fraction", cfg.train_fraction, "train split fraction");
    cmd->add_option("--validation-fraction", cfg.validation_fraction,
                    "validation split fraction");
    cmd->add_option("--test-fraction", cfg.test_fraction, "test split fraction");
    cmd->add_flag("--reselect-rank", cfg.reselect_rank_each_repetition,
                  "re-select the rank inside every benchmark repetition");
  };

  CLI::App* fit = app.add_subcommand("fit", "train a CoxNTF model");
  add_common(fit, true, false);
  CLI::App* predict =
      app.add_subcommand("predict", "score new samples with a fitted model");
  add_common(predict, true, true);
  CLI::App* bench =
      app.add_subcommand("benchmark", "repeated-split COX/NMF/NTF comparison");
  add_common(bench, true, false);
  CLI::App* rank = app.add_subcommand("rank-select", "choose the NTF rank");
  add_common(rank, true, false);
  CLI::App* expat =
      app.add_subcommand("export-patterns", "export pattern and hazard-ratio reports");
  add_common(expat, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) return run_fit(cfg);
    if (predict->parsed()) return run_predict(cfg, model_path);
    if (bench->parsed()) return run_benchmark(cfg);
    if (rank->parsed()) return run_rank_select(cfg);
    if (expat->parsed()) return run_export_patterns(cfg, model_path);
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
