#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvshrink/estimators.hpp"

namespace cvshrink {

/// One replication study configuration. Per-rep randomness is derived
/// deterministically from `seed`: rep r uses streams
///   seed.stream_id * 2^32 + 8r + {0 data, 1 splits, 2 gibbs, 3 truth, 4 outer split},
/// so replications can run in parallel and still reproduce bit-for-bit.
struct SimConfig {
  Task task = Task::continuous;
  int n = 150;
  int p = 50;
  Eigen::VectorXd beta0;    // empty selects (0.5, 0.5, 0.5, 0.5, 0, ..., 0)
  double noise_sd = 1.0;
  int n1 = 100;
  int K = 39;
  double lambda = 0.10;
  int reps = 299;
  PriorSpec prior;
  GibbsConfig gibbs;        // iterations/burn_in; the rng field is superseded by derived streams
  double alpha = 0.05;
  RngState seed;
  long long mc_truth_draws = 1'000'000;

  int n2() const { return n - n1; }
  Eigen::VectorXd resolved_beta0() const;
  LearnerSpec learner_spec() const;
};

struct RepResult {
  int rep = 0;
  double true_err0 = 0.0;
  PerformanceReport report;
  double abs_naive = 0.0;
  double abs_cv = 0.0;
  double abs_eb = 0.0;
  double abs_bayes = 0.0;
  bool interval_covers = false;
  bool truth_degenerate = false;  // all-ties c-index truth
  double baseline_mspe = 0.0;     // benchmark runs only
};

struct StudySummary {
  SimConfig config;
  double mae_naive = 0.0;
  double mae_cv = 0.0;
  double mae_eb = 0.0;
  double mae_bayes = 0.0;
  double rel_mae_naive = 0.0;
  double rel_mae_cv = 0.0;
  double rel_mae_eb = 0.0;
  double rel_mae_bayes = 0.0;
  double coverage = 0.0;
  double true_err_mean = 0.0;
  double baseline_mspe = 0.0;
  bool has_baseline = false;
  bool has_eb_bayes = false;
  std::vector<RepResult> rep_results;
  std::vector<std::string> failures;
};

/// Substream derivation shared by all pipelines; see SimConfig.
RngState derive_stream(const RngState& seed, int rep, int sub);

/// n observations with iid standard-normal features and
/// Y = beta0 . Z + noise_sd * eps.
Dataset gen_continuous(const SimConfig& cfg, Rng& rng);

/// Same latent model thresholded at zero: Y = 1{beta0 . Z + noise_sd * eps > 0}.
Dataset gen_binary(const SimConfig& cfg, Rng& rng);

/// Synthetic hourly-demand surrogate: seven numeric covariates with a
/// strongly nonlinear hour-of-day effect, suitable as a stand-in benchmark
/// dataset when no real file is supplied.
Dataset gen_hourly_demand(int rows, Rng& rng);

/// Exact MSPE of a linear score model under the standard-normal generator:
/// intercept^2 + |beta - beta0|^2 + noise_sd^2.
double true_mspe(const LinearModel& model, const Eigen::VectorXd& beta0, double noise_sd = 1.0);

struct TrueCindex {
  double value = 0.0;
  bool all_ties = false;  // constant score: strict indicator gives 0
};

/// Monte-Carlo c-index of a fixed model under the binary generator,
/// counting strictly ordered pairs across classes on mc_n fresh draws.
TrueCindex true_cindex(const LinearModel& model, const Eigen::VectorXd& beta0, double noise_sd,
                       long long mc_n, Rng& rng);

/// Split-family pipeline on a fixed dataset (streams of rep 0): K+1 splits,
/// per-split fits and evaluations, full estimator stack.
PerformanceReport evaluate_dataset(const Dataset& data, const SimConfig& cfg,
                                   PosteriorChain* chain_out = nullptr);

/// Full replication study: generate, split, fit, evaluate, estimate, score
/// against the known truth. Per-rep failures are recorded and skipped; more
/// than 10% failures aborts. threads = 0 picks hardware concurrency; the
/// summary is identical for any thread count.
StudySummary run_study(const SimConfig& cfg, int threads = 0);

/// Benchmark-split protocol: each rep draws a fresh working set of
/// inner_cfg.n rows, runs the full inner pipeline on it, and scores the four
/// estimates against the split-0 model's loss on the large holdout, which is
/// treated as the truth. Requires inner_cfg.n + holdout_n == data.n().
StudySummary run_benchmark(const Dataset& data, int holdout_n, const SimConfig& inner_cfg, int threads = 0);

}  // namespace cvshrink
