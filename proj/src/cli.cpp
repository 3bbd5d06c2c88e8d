#include "cvshrink/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "cvshrink/csv.hpp"

namespace cvshrink {

using nlohmann::json;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void check_learner(const RunConfig& cfg) {
  if (cfg.learner.empty()) return;
  const std::string expected = cfg.task == Task::continuous ? "lasso_linear" : "lasso_logistic";
  if (cfg.learner != expected)
    throw Error(ErrorCode::ConfigError,
                "learner '" + cfg.learner + "' does not fit a " + to_string(cfg.task) + " task");
}

Dataset load_input(const RunConfig& cfg) {
  if (cfg.input_path.empty()) throw Error(ErrorCode::ConfigError, "--input is required");
  if (cfg.target_column.empty()) throw Error(ErrorCode::ConfigError, "--target is required");
  try {
    return ingest_csv(cfg.input_path, cfg.target_column, cfg.categorical_columns, cfg.task);
  } catch (const Error& e) {
    throw Error(e.code(), "ingest stage, " + cfg.input_path + ": " + e.what());
  }
}

std::string describe_report(const PerformanceReport& r) {
  std::string out;
  out += "loss: " + std::string(to_string(r.loss_kind)) + ", splits: " + std::to_string(r.n_splits) + "\n";
  out += "naive : " + format_double(r.naive) + "\n";
  out += "cv    : " + format_double(r.cv) + "\n";
  out += "eb    : " + (r.has_eb ? format_double(r.eb) : std::string("unavailable (K=0)")) + "\n";
  out += "bayes : " + (r.has_bayes ? format_double(r.bayes) : std::string("unavailable (K=0)")) + "\n";
  if (r.has_bayes)
    out += "credible interval (alpha=" + format_double(r.alpha) + "): [" + format_double(r.ci_lo) +
           ", " + format_double(r.ci_hi) + "]\n";
  return out;
}

GridRow row_of(const StudySummary& s) { return grid_row_from_summary_json(summary_to_json(s)); }

}  // namespace

SimConfig RunConfig::sim_config() const {
  SimConfig sim;
  sim.task = task;
  sim.n = n;
  sim.p = p;
  sim.noise_sd = noise_sd;
  sim.n1 = n1;
  sim.K = K;
  sim.lambda = resolved_lambda();
  sim.reps = reps;
  sim.prior = prior;
  sim.gibbs.iterations = gibbs_iterations;
  sim.gibbs.burn_in = gibbs_burn_in;
  sim.alpha = alpha;
  sim.seed = RngState{seed, stream};
  sim.mc_truth_draws = mc_truth_draws;
  return sim;
}

void merge_config_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config root must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "schema_version") {
        if (value.get<int>() != kSchemaVersion) throw Error(ErrorCode::SchemaMismatch, "config schema_version");
      } else if (key == "task") {
        const auto s = value.get<std::string>();
        if (s == "continuous") {
          cfg.task = Task::continuous;
        } else if (s == "binary") {
          cfg.task = Task::binary;
        } else {
          throw Error(ErrorCode::ConfigError, "task must be 'continuous' or 'binary'");
        }
      } else if (key == "n") {
        cfg.n = value.get<int>();
      } else if (key == "p") {
        cfg.p = value.get<int>();
      } else if (key == "n1") {
        cfg.n1 = value.get<int>();
      } else if (key == "K") {
        cfg.K = value.get<int>();
      } else if (key == "lambda") {
        cfg.lambda = value.get<double>();
      } else if (key == "noise_sd") {
        cfg.noise_sd = value.get<double>();
      } else if (key == "alpha") {
        cfg.alpha = value.get<double>();
      } else if (key == "a0") {
        cfg.prior.a0 = value.get<double>();
      } else if (key == "b0") {
        cfg.prior.b0 = value.get<double>();
      } else if (key == "kappa0") {
        cfg.prior.kappa0 = value.get<double>();
      } else if (key == "M") {
        cfg.gibbs_iterations = value.get<int>();
      } else if (key == "M0") {
        cfg.gibbs_burn_in = value.get<int>();
      } else if (key == "reps") {
        cfg.reps = value.get<int>();
      } else if (key == "seed") {
        cfg.seed = value.get<std::uint64_t>();
      } else if (key == "stream") {
        cfg.stream = value.get<std::uint64_t>();
      } else if (key == "mc_truth_draws") {
        cfg.mc_truth_draws = value.get<long long>();
      } else if (key == "grid") {
        cfg.grid = value.get<std::vector<int>>();
      } else if (key == "learner") {
        cfg.learner = value.get<std::string>();
      } else if (key == "input") {
        cfg.input_path = value.get<std::string>();
      } else if (key == "target") {
        cfg.target_column = value.get<std::string>();
      } else if (key == "categorical") {
        cfg.categorical_columns = value.get<std::vector<std::string>>();
      } else if (key == "output_dir") {
        cfg.output_dir = value.get<std::string>();
      } else if (key == "threads") {
        cfg.threads = value.get<int>();
      } else if (key == "dump_chain") {
        cfg.dump_chain = value.get<bool>();
      } else if (key == "synthetic") {
        cfg.synthetic = value.get<bool>();
      } else if (key == "synthetic_rows") {
        cfg.synthetic_rows = value.get<int>();
      } else if (key == "working_n") {
        cfg.working_n = value.get<int>();
      } else {
        throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, "config key '" + key + "': " + e.what());
    }
  }
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* dir = std::getenv("CVSHRINK_OUTPUT_DIR"); dir != nullptr && *dir != '\0')
    cfg.output_dir = dir;
}

PerformanceReport cmd_evaluate(const RunConfig& cfg) {
  check_learner(cfg);
  const Dataset data = load_input(cfg);
  SimConfig sim = cfg.sim_config();
  sim.n = static_cast<int>(data.n());
  sim.p = static_cast<int>(data.p());
  sim.reps = 1;

  PosteriorChain chain;
  const PerformanceReport report = evaluate_dataset(data, sim, cfg.dump_chain ? &chain : nullptr);
  atomic_write(join_path(cfg.output_dir, "report.json"), report_to_json(report).dump(2) + "\n");
  if (cfg.dump_chain && report.has_bayes)
    atomic_write(join_path(cfg.output_dir, "chain.tsv"), chain_tsv(chain));
  std::cout << describe_report(report);
  return report;
}

std::vector<StudySummary> cmd_simulate(const RunConfig& cfg) {
  check_learner(cfg);
  std::vector<int> grid = cfg.grid.empty() ? std::vector<int>{30, 50, 75, 100, 110} : cfg.grid;
  std::vector<StudySummary> summaries;
  std::vector<GridRow> rows;
  for (const int n2 : grid) {
    SimConfig sim = cfg.sim_config();
    sim.n1 = sim.n - n2;
    StudySummary summary = run_study(sim, cfg.threads);
    const std::string tag = "n2_" + std::to_string(n2);
    atomic_write(join_path(cfg.output_dir, "summary_" + tag + ".json"),
                 summary_to_json(summary).dump(2) + "\n");
    atomic_write(join_path(cfg.output_dir, "reps_" + tag + ".tsv"), reps_table_tsv(summary));
    rows.push_back(row_of(summary));
    summaries.push_back(std::move(summary));
  }
  atomic_write(join_path(cfg.output_dir, "grid.tsv"), grid_table_tsv(rows));
  std::cout << grid_table_pretty(rows);
  return summaries;
}

std::vector<StudySummary> cmd_benchmark(const RunConfig& cfg) {
  check_learner(cfg);
  Dataset data;
  if (cfg.synthetic) {
    Rng rng(derive_stream(RngState{cfg.seed, cfg.stream}, 0, 5));
    data = gen_hourly_demand(cfg.synthetic_rows, rng);
    data.task = cfg.task;
    if (cfg.task == Task::binary)
      throw Error(ErrorCode::ConfigError, "the synthetic surrogate is a continuous dataset");
  } else {
    data = load_input(cfg);
  }
  const int holdout_n = static_cast<int>(data.n()) - cfg.working_n;
  if (holdout_n < 2)
    throw Error(ErrorCode::InsufficientData, "dataset leaves holdout of " + std::to_string(holdout_n) +
                                                 " rows after the working set of " +
                                                 std::to_string(cfg.working_n));

  std::vector<int> grid = cfg.grid.empty() ? std::vector<int>{50, 100, 140, 200} : cfg.grid;
  std::vector<StudySummary> summaries;
  std::vector<GridRow> rows;
  for (const int n1 : grid) {
    SimConfig inner = cfg.sim_config();
    inner.n = cfg.working_n;
    inner.p = static_cast<int>(data.p());
    inner.n1 = n1;
    StudySummary summary = run_benchmark(data, holdout_n, inner, cfg.threads);
    const std::string tag = "n1_" + std::to_string(n1);
    atomic_write(join_path(cfg.output_dir, "summary_" + tag + ".json"),
                 summary_to_json(summary).dump(2) + "\n");
    atomic_write(join_path(cfg.output_dir, "reps_" + tag + ".tsv"), reps_table_tsv(summary));
    rows.push_back(row_of(summary));
    summaries.push_back(std::move(summary));
  }
  atomic_write(join_path(cfg.output_dir, "grid.tsv"), grid_table_tsv(rows));
  std::cout << grid_table_pretty(rows);
  return summaries;
}

std::string cmd_report(const std::vector<std::string>& summary_paths, const std::string& output_dir) {
  if (summary_paths.empty()) throw Error(ErrorCode::ConfigError, "no summary files given");
  std::vector<GridRow> rows;
  bool any_baseline = false, all_baseline = true;
  for (const auto& path : summary_paths) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    rows.push_back(grid_row_from_summary_json(j));
    any_baseline |= rows.back().has_baseline;
    all_baseline &= rows.back().has_baseline;
  }
  if (any_baseline && !all_baseline)
    throw Error(ErrorCode::SchemaMismatch, "cannot merge benchmark and plain study summaries");
  atomic_write(join_path(output_dir, "table.tsv"), grid_table_tsv(rows));
  const std::string pretty = grid_table_pretty(rows);
  std::cout << pretty;
  return pretty;
}

}  // namespace cvshrink
