#include "cvshrink/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace cvshrink {

namespace {

constexpr int kSubData = 0;
constexpr int kSubSplits = 1;
constexpr int kSubGibbs = 2;
constexpr int kSubTruth = 3;
constexpr int kSubOuter = 4;

void check_config(const SimConfig& cfg) {
  if (cfg.n1 < 1 || cfg.n - cfg.n1 < 2)
    throw Error(ErrorCode::InvalidSizes, "need 1 <= n1 <= n-2 (n=" + std::to_string(cfg.n) +
                                             ", n1=" + std::to_string(cfg.n1) + ")");
  if (cfg.reps < 1) throw Error(ErrorCode::ConfigError, "reps must be >= 1");
  if (cfg.K < 0) throw Error(ErrorCode::ConfigError, "K must be >= 0");
  if (cfg.p < 1) throw Error(ErrorCode::ConfigError, "p must be >= 1");
  if (cfg.beta0.size() != 0 && cfg.beta0.size() != cfg.p)
    throw Error(ErrorCode::ConfigError, "beta0 must be empty or length p");
  if (!(cfg.noise_sd > 0.0)) throw Error(ErrorCode::ConfigError, "noise_sd must be positive");
  if (cfg.mc_truth_draws < 1000) throw Error(ErrorCode::ConfigError, "mc_truth_draws too small");
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Results must be
// written to index-addressed slots so completion order cannot matter.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

struct RepOutcome {
  bool ok = false;
  RepResult result;
  std::string failure;
};

// Shared per-rep pipeline: family of splits, per-split fits and evaluations,
// then the full estimator stack.
PerformanceReport evaluate_family(const Dataset& data, const SimConfig& cfg, int rep,
                                  LinearModel* model0_out, SplitPlan* split0_out = nullptr,
                                  PosteriorChain* chain_out = nullptr) {
  Rng split_rng(derive_stream(cfg.seed, rep, kSubSplits));
  const auto family = make_split_family(static_cast<int>(data.n()), cfg.n1, cfg.K, split_rng);
  const LearnerSpec spec = cfg.learner_spec();

  std::vector<SplitEvaluation> evals;
  evals.reserve(family.size());
  for (const auto& split : family) {
    try {
      const LinearModel model = fit_on_split(data, split, spec);
      evals.push_back(cfg.task == Task::continuous ? evaluate_mspe(model, data, split)
                                                   : evaluate_cindex(model, data, split));
      if (split.split_id == 0) {
        if (model0_out != nullptr) *model0_out = model;
        if (split0_out != nullptr) *split0_out = split;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "fit/evaluate stage, split " + std::to_string(split.split_id) + ": " + e.what());
    }
  }
  GibbsConfig gibbs = cfg.gibbs;
  gibbs.rng = derive_stream(cfg.seed, rep, kSubGibbs);
  try {
    return full_report(evals, cfg.prior, gibbs, cfg.alpha, chain_out);
  } catch (const Error& e) {
    throw Error(e.code(), std::string("estimation stage: ") + e.what());
  }
}

void score_against_truth(RepResult& res, double truth) {
  res.true_err0 = truth;
  res.abs_naive = std::abs(res.report.naive - truth);
  res.abs_cv = std::abs(res.report.cv - truth);
  if (res.report.has_eb) res.abs_eb = std::abs(res.report.eb - truth);
  if (res.report.has_bayes) {
    res.abs_bayes = std::abs(res.report.bayes - truth);
    res.interval_covers = res.report.ci_lo <= truth && truth <= res.report.ci_hi;
  }
}

StudySummary summarize(const SimConfig& cfg, std::vector<RepOutcome>&& outcomes, bool benchmark) {
  StudySummary summary;
  summary.config = cfg;
  summary.has_eb_bayes = cfg.K >= 1;
  int ok = 0, covered = 0;
  for (auto& outcome : outcomes) {
    if (!outcome.ok) {
      summary.failures.push_back(std::move(outcome.failure));
      continue;
    }
    const RepResult& r = outcome.result;
    ++ok;
    summary.mae_naive += r.abs_naive;
    summary.mae_cv += r.abs_cv;
    summary.mae_eb += r.abs_eb;
    summary.mae_bayes += r.abs_bayes;
    const double scale = r.true_err0 != 0.0 ? std::abs(r.true_err0) : 1.0;
    summary.rel_mae_naive += r.abs_naive / scale;
    summary.rel_mae_cv += r.abs_cv / scale;
    summary.rel_mae_eb += r.abs_eb / scale;
    summary.rel_mae_bayes += r.abs_bayes / scale;
    summary.true_err_mean += r.true_err0;
    summary.baseline_mspe += r.baseline_mspe;
    if (r.interval_covers) ++covered;
    summary.rep_results.push_back(std::move(outcome.result));
  }
  if (static_cast<double>(summary.failures.size()) > 0.1 * static_cast<double>(cfg.reps)) {
    std::string detail = std::to_string(summary.failures.size()) + "/" + std::to_string(cfg.reps) +
                         " replications failed; first: " + summary.failures.front();
    throw Error(ErrorCode::StudyFailed, detail);
  }
  const double denom = static_cast<double>(ok);
  summary.mae_naive /= denom;
  summary.mae_cv /= denom;
  summary.mae_eb /= denom;
  summary.mae_bayes /= denom;
  summary.rel_mae_naive /= denom;
  summary.rel_mae_cv /= denom;
  summary.rel_mae_eb /= denom;
  summary.rel_mae_bayes /= denom;
  summary.true_err_mean /= denom;
  summary.baseline_mspe /= denom;
  summary.coverage = denom > 0.0 ? static_cast<double>(covered) / denom : 0.0;
  summary.has_baseline = benchmark && cfg.task == Task::continuous;
  return summary;
}

}  // namespace

RngState derive_stream(const RngState& seed, int rep, int sub) {
  return RngState{seed.seed,
                  seed.stream_id * 0x100000000ULL + static_cast<std::uint64_t>(rep) * 8ULL +
                      static_cast<std::uint64_t>(sub)};
}

Eigen::VectorXd SimConfig::resolved_beta0() const {
  if (beta0.size() != 0) return beta0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < std::min(p, 4); ++j) b[j] = 0.5;
  return b;
}

LearnerSpec SimConfig::learner_spec() const {
  LearnerSpec spec;
  spec.kind = task == Task::continuous ? LearnerKind::lasso_linear : LearnerKind::lasso_logistic;
  spec.lambda = lambda;
  return spec;
}

Dataset gen_continuous(const SimConfig& cfg, Rng& rng) {
  const Eigen::VectorXd beta = cfg.resolved_beta0();
  Dataset data;
  data.task = Task::continuous;
  data.features.resize(cfg.n, cfg.p);
  data.targets.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.p; ++j) data.features(i, j) = rng.normal();
    data.targets[i] = data.features.row(i).dot(beta) + cfg.noise_sd * rng.normal();
  }
  return data;
}

Dataset gen_binary(const SimConfig& cfg, Rng& rng) {
  const Eigen::VectorXd beta = cfg.resolved_beta0();
  Dataset data;
  data.task = Task::binary;
  data.features.resize(cfg.n, cfg.p);
  data.targets.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.p; ++j) data.features(i, j) = rng.normal();
    const double latent = data.features.row(i).dot(beta) + cfg.noise_sd * rng.normal();
    data.targets[i] = latent > 0.0 ? 1.0 : 0.0;
  }
  return data;
}

Dataset gen_hourly_demand(int rows, Rng& rng) {
  if (rows < 2) throw Error(ErrorCode::InvalidSizes, "need at least 2 rows");
  Dataset data;
  data.task = Task::continuous;
  data.feature_names = {"hour", "temp", "atemp", "humidity", "windspeed", "workingday", "season"};
  data.features.resize(rows, 7);
  data.targets.resize(rows);
  for (int i = 0; i < rows; ++i) {
    const double hour = static_cast<double>(rng.next_below(24));
    const double temp = rng.uniform01();
    const double atemp = std::clamp(temp + 0.1 * rng.normal(), 0.0, 1.0);
    const double humidity = rng.uniform01();
    const double windspeed = std::clamp(std::abs(0.2 * rng.normal()), 0.0, 1.0);
    const double workingday = rng.uniform01() < 5.0 / 7.0 ? 1.0 : 0.0;
    const double season = 1.0 + static_cast<double>(rng.next_below(4));
    data.features.row(i) << hour, temp, atemp, humidity, windspeed, workingday, season;

    // Two rush-hour peaks modulated by weather; deliberately nonlinear in hour.
    const double peaks = std::exp(-(hour - 8.0) * (hour - 8.0) / 8.0) +
                         std::exp(-(hour - 17.0) * (hour - 17.0) / 10.0);
    const double mean = 25.0 + 260.0 * peaks * (0.6 + 0.8 * temp) + 90.0 * temp - 60.0 * humidity -
                        30.0 * windspeed + 35.0 * workingday * peaks + 8.0 * season;
    data.targets[i] = std::max(0.0, mean + 45.0 * rng.normal());
  }
  return data;
}

double true_mspe(const LinearModel& model, const Eigen::VectorXd& beta0, double noise_sd) {
  if (model.coefficients.size() != beta0.size())
    throw Error(ErrorCode::DimensionMismatch, "model and beta0 dimensions differ");
  return model.intercept * model.intercept + (model.coefficients - beta0).squaredNorm() +
         noise_sd * noise_sd;
}

TrueCindex true_cindex(const LinearModel& model, const Eigen::VectorXd& beta0, double noise_sd,
                       long long mc_n, Rng& rng) {
  if (model.coefficients.size() != beta0.size())
    throw Error(ErrorCode::DimensionMismatch, "model and beta0 dimensions differ");
  // Coordinates outside both supports never influence (score, Y); skipping
  // them marginalizes exactly and keeps the draw count manageable.
  std::vector<int> active;
  for (Eigen::Index j = 0; j < beta0.size(); ++j)
    if (model.coefficients[j] != 0.0 || beta0[j] != 0.0) active.push_back(static_cast<int>(j));

  std::vector<double> pos, neg;
  pos.reserve(static_cast<std::size_t>(mc_n / 2 + 16));
  neg.reserve(static_cast<std::size_t>(mc_n / 2 + 16));
  for (long long i = 0; i < mc_n; ++i) {
    double score = model.intercept;
    double latent = 0.0;
    for (int j : active) {
      const double z = rng.normal();
      score += model.coefficients[j] * z;
      latent += beta0[j] * z;
    }
    latent += noise_sd * rng.normal();
    (latent > 0.0 ? pos : neg).push_back(score);
  }
  if (pos.empty() || neg.empty())
    throw Error(ErrorCode::DegenerateClasses, "one outcome class is empty in the Monte-Carlo sample");

  std::sort(neg.begin(), neg.end());
  long long ordered_pairs = 0;
  double lo = pos.front(), hi = pos.front();
  for (double s : pos) {
    ordered_pairs += std::lower_bound(neg.begin(), neg.end(), s) - neg.begin();
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  TrueCindex out;
  out.value = static_cast<double>(ordered_pairs) /
              (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
  out.all_ties = lo == hi && lo == neg.front() && lo == neg.back();
  return out;
}

PerformanceReport evaluate_dataset(const Dataset& data, const SimConfig& cfg, PosteriorChain* chain_out) {
  if (data.n() != cfg.n)
    throw Error(ErrorCode::ConfigError,
                "config n=" + std::to_string(cfg.n) + " but dataset has " + std::to_string(data.n()) + " rows");
  check_config(cfg);
  return evaluate_family(data, cfg, 0, nullptr, nullptr, chain_out);
}

StudySummary run_study(const SimConfig& cfg, int threads) {
  check_config(cfg);
  const Eigen::VectorXd beta = cfg.resolved_beta0();
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.reps));

  parallel_for(cfg.reps, threads, [&](int rep) {
    RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];
    try {
      Rng data_rng(derive_stream(cfg.seed, rep, kSubData));
      const Dataset data = cfg.task == Task::continuous ? gen_continuous(cfg, data_rng)
                                                        : gen_binary(cfg, data_rng);
      RepResult res;
      res.rep = rep;
      LinearModel model0;
      res.report = evaluate_family(data, cfg, rep, &model0);
      double truth;
      if (cfg.task == Task::continuous) {
        truth = true_mspe(model0, beta, cfg.noise_sd);
      } else {
        Rng truth_rng(derive_stream(cfg.seed, rep, kSubTruth));
        const TrueCindex tc = true_cindex(model0, beta, cfg.noise_sd, cfg.mc_truth_draws, truth_rng);
        truth = tc.value;
        res.truth_degenerate = tc.all_ties;
      }
      score_against_truth(res, truth);
      out.result = std::move(res);
      out.ok = true;
    } catch (const Error& e) {
      out.failure = "rep " + std::to_string(rep) + ": " + e.what();
    }
  });
  return summarize(cfg, std::move(outcomes), false);
}

StudySummary run_benchmark(const Dataset& data, int holdout_n, const SimConfig& inner_cfg, int threads) {
  check_config(inner_cfg);
  const int n_total = static_cast<int>(data.n());
  if (holdout_n < 2 || inner_cfg.n + holdout_n != n_total)
    throw Error(ErrorCode::InsufficientData,
                "need working + holdout == total rows (working=" + std::to_string(inner_cfg.n) +
                    ", holdout=" + std::to_string(holdout_n) + ", total=" + std::to_string(n_total) + ")");

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(inner_cfg.reps));
  parallel_for(inner_cfg.reps, threads, [&](int rep) {
    RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];
    try {
      Rng outer_rng(derive_stream(inner_cfg.seed, rep, kSubOuter));
      const SplitPlan outer = make_split(n_total, inner_cfg.n, outer_rng);
      const Dataset working = subset_rows(data, outer.train_indices);
      const Dataset holdout = subset_rows(data, outer.test_indices);

      RepResult res;
      res.rep = rep;
      LinearModel model0;
      SplitPlan split0;
      res.report = evaluate_family(working, inner_cfg, rep, &model0, &split0);

      const Eigen::VectorXd holdout_scores = predict_score(model0, holdout.features);
      if (inner_cfg.task == Task::continuous) {
        score_against_truth(res, (holdout.targets - holdout_scores).squaredNorm() /
                                     static_cast<double>(holdout.targets.size()));
        // Context baseline: constant prediction at the split-0 training mean.
        double train_mean = 0.0;
        for (int idx : split0.train_indices) train_mean += working.targets[idx];
        train_mean /= static_cast<double>(split0.train_indices.size());
        res.baseline_mspe =
            (holdout.targets.array() - train_mean).square().sum() / static_cast<double>(holdout.targets.size());
      } else {
        // Binary benchmark: holdout c-index of the split-0 model is the truth.
        std::vector<double> pos, neg;
        for (Eigen::Index i = 0; i < holdout.targets.size(); ++i)
          (holdout.targets[i] == 1.0 ? pos : neg).push_back(holdout_scores[i]);
        if (pos.empty() || neg.empty())
          throw Error(ErrorCode::DegenerateTestSet, "holdout lacks one outcome class");
        std::sort(neg.begin(), neg.end());
        long long ordered = 0;
        for (double s : pos) ordered += std::lower_bound(neg.begin(), neg.end(), s) - neg.begin();
        score_against_truth(res, static_cast<double>(ordered) /
                                     (static_cast<double>(pos.size()) * static_cast<double>(neg.size())));
      }
      out.result = std::move(res);
      out.ok = true;
    } catch (const Error& e) {
      out.failure = "rep " + std::to_string(rep) + ": " + e.what();
    }
  });
  return summarize(inner_cfg, std::move(outcomes), true);
}

}  // namespace cvshrink
