#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "cvshrink/io.hpp"
#include "cvshrink/simulation.hpp"

namespace cvshrink {

/// Resolved options for one CLI invocation. Values come from the JSON config
/// file first; command-line flags override individual keys; the
/// CVSHRINK_OUTPUT_DIR environment variable overrides the output directory.
struct RunConfig {
  Task task = Task::continuous;
  int n = 150;
  int p = 50;
  int n1 = 100;
  int K = 39;
  double lambda = -1.0;  // negative selects the task default (0.10 / 0.13)
  double noise_sd = 1.0;
  double alpha = 0.05;
  PriorSpec prior;
  int gibbs_iterations = 10'000;
  int gibbs_burn_in = 2'000;
  int reps = 299;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  long long mc_truth_draws = 1'000'000;
  std::vector<int> grid;  // n2 grid for simulate, n1 grid for benchmark
  std::string learner;    // optional; must agree with the task
  std::string input_path;
  std::string target_column;
  std::vector<std::string> categorical_columns;
  std::string output_dir = ".";
  int threads = 0;
  bool dump_chain = false;
  bool synthetic = false;
  int synthetic_rows = 17'379;
  int working_n = 300;

  double resolved_lambda() const { return lambda >= 0.0 ? lambda : (task == Task::continuous ? 0.10 : 0.13); }
  SimConfig sim_config() const;
};

/// Merges recognized keys of a JSON config document into cfg; unknown keys
/// are a ConfigError so typos cannot silently fall back to defaults.
void merge_config_json(RunConfig& cfg, const nlohmann::json& j);

void apply_env_overrides(RunConfig& cfg);

/// Runs the split/fit/estimate pipeline on the ingested dataset and writes
/// report.json (plus chain.tsv when requested) under output_dir.
PerformanceReport cmd_evaluate(const RunConfig& cfg);

/// Repeats run_study over the n2 grid; writes per-point summary JSON and
/// replication tables plus a combined grid.tsv.
std::vector<StudySummary> cmd_simulate(const RunConfig& cfg);

/// Benchmark-split protocol over the n1 grid on a CSV file or the synthetic
/// surrogate; outputs mirror cmd_simulate.
std::vector<StudySummary> cmd_benchmark(const RunConfig& cfg);

/// Merges summary JSON files into one plot-ready table (table.tsv), sorted by
/// n2, estimator columns in the fixed order naive, cv, eb, bayes. Returns the
/// pretty-printed table.
std::string cmd_report(const std::vector<std::string>& summary_paths, const std::string& output_dir);

}  // namespace cvshrink
