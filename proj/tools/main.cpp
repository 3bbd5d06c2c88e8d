#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cvshrink/cli.hpp"

namespace {

using cvshrink::RunConfig;

std::string find_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return "";
}

void add_common_options(CLI::App* cmd, RunConfig& cfg, std::string& task_name) {
  cmd->add_option("--config", "JSON config file (flags override its keys)");
  cmd->add_option("--task", task_name, "continuous or binary");
  cmd->add_option("--n", cfg.n, "dataset size for simulated data");
  cmd->add_option("--p", cfg.p, "feature count for simulated data");
  cmd->add_option("--n1", cfg.n1, "training-set size per split");
  cmd->add_option("--K", cfg.K, "number of additional random splits");
  cmd->add_option("--lambda", cfg.lambda, "lasso penalty (default 0.10 continuous, 0.13 binary)");
  cmd->add_option("--noise-sd", cfg.noise_sd, "generator noise standard deviation");
  cmd->add_option("--alpha", cfg.alpha, "credible-interval level is 1-alpha");
  cmd->add_option("--a0", cfg.prior.a0, "Gamma prior shape for tau^-2");
  cmd->add_option("--b0", cfg.prior.b0, "Gamma prior rate for tau^-2");
  cmd->add_option("--kappa0", cfg.prior.kappa0, "prior precision scale for mu0");
  cmd->add_option("--M", cfg.gibbs_iterations, "Gibbs iterations");
  cmd->add_option("--M0", cfg.gibbs_burn_in, "Gibbs burn-in");
  cmd->add_option("--reps", cfg.reps, "number of replications");
  cmd->add_option("--stream", cfg.stream, "RNG stream id");
  cmd->add_option("--mc-truth-draws", cfg.mc_truth_draws, "Monte-Carlo draws for c-index truth");
  cmd->add_option("--learner", cfg.learner, "lasso_linear or lasso_logistic");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
  cmd->add_option("--out", cfg.output_dir, "output directory");
}

cvshrink::Task parse_task(const std::string& name) {
  if (name == "continuous") return cvshrink::Task::continuous;
  if (name == "binary") return cvshrink::Task::binary;
  throw cvshrink::Error(cvshrink::ErrorCode::ConfigError, "task must be 'continuous' or 'binary'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-sample performance estimation for one trained model:\n"
               "naive split estimate pooled with repeated-split cross-validation\n"
               "under a normal random-effects model (hierarchical Bayes + EB)."};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string task_name;
  std::vector<std::string> report_inputs;

  try {
    const std::string config_path = find_config_path(argc, argv);
    if (!config_path.empty()) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(cvshrink::read_file(config_path));
      } catch (const nlohmann::json::exception& e) {
        throw cvshrink::Error(cvshrink::ErrorCode::ConfigError,
                              std::string("config file parse: ") + e.what());
      }
      merge_config_json(cfg, doc);
    }
  } catch (const cvshrink::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  }

  auto* evaluate = app.add_subcommand("evaluate", "estimate one model's performance on a CSV dataset");
  add_common_options(evaluate, cfg, task_name);
  evaluate->add_option("--input", cfg.input_path, "CSV file with header row");
  evaluate->add_option("--target", cfg.target_column, "outcome column name");
  evaluate->add_option("--categorical", cfg.categorical_columns, "categorical columns to one-hot encode")
      ->delimiter(',');
  evaluate->add_flag("--dump-chain", cfg.dump_chain, "also write the Gibbs chain to chain.tsv");
  auto* eval_seed = evaluate->add_option("--seed", cfg.seed, "RNG seed");

  auto* simulate = app.add_subcommand("simulate", "replication study on simulated data over an n2 grid");
  add_common_options(simulate, cfg, task_name);
  simulate->add_option("--grid", cfg.grid, "n2 grid (default 30,50,75,100,110)")->delimiter(',');
  auto* sim_seed = simulate->add_option("--seed", cfg.seed, "RNG seed (required)");

  auto* benchmark = app.add_subcommand("benchmark", "benchmark-split study on a CSV or synthetic data");
  add_common_options(benchmark, cfg, task_name);
  benchmark->add_option("--input", cfg.input_path, "CSV file with header row");
  benchmark->add_option("--target", cfg.target_column, "outcome column name");
  benchmark->add_option("--categorical", cfg.categorical_columns, "categorical columns to one-hot encode")
      ->delimiter(',');
  benchmark->add_flag("--synthetic", cfg.synthetic, "use the built-in synthetic surrogate dataset");
  benchmark->add_option("--synthetic-rows", cfg.synthetic_rows, "rows for the surrogate (default 17379)");
  benchmark->add_option("--working-n", cfg.working_n, "working-set size (default 300)");
  benchmark->add_option("--grid", cfg.grid, "n1 grid (default 50,100,140,200)")->delimiter(',');
  auto* bench_seed = benchmark->add_option("--seed", cfg.seed, "RNG seed (required)");

  auto* report = app.add_subcommand("report", "merge summary JSON files into one table");
  report->add_option("inputs", report_inputs, "summary JSON files")->required();
  report->add_option("--out", cfg.output_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!task_name.empty()) cfg.task = parse_task(task_name);
    apply_env_overrides(cfg);
    if (simulate->parsed() && sim_seed->count() == 0)
      throw cvshrink::Error(cvshrink::ErrorCode::ConfigError, "--seed is required for simulate");
    if (benchmark->parsed() && bench_seed->count() == 0)
      throw cvshrink::Error(cvshrink::ErrorCode::ConfigError, "--seed is required for benchmark");
    (void)eval_seed;

    if (evaluate->parsed()) {
      cvshrink::cmd_evaluate(cfg);
    } else if (simulate->parsed()) {
      cvshrink::cmd_simulate(cfg);
    } else if (benchmark->parsed()) {
      cvshrink::cmd_benchmark(cfg);
    } else if (report->parsed()) {
      cvshrink::cmd_report(report_inputs, cfg.output_dir);
    }
  } catch (const cvshrink::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
