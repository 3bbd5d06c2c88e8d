#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cvshrink/metrics.hpp"
#include "cvshrink/rng.hpp"

namespace cvshrink {

/// Weakly-informative prior: tau0^-2 ~ Gamma(a0, b0), mu0 | tau0^2 ~ N(0, tau0^2/kappa0).
/// Defaults keep the pull of the prior mean 0 negligible.
struct PriorSpec {
  double a0 = 0.01;
  double b0 = 0.01;
  double kappa0 = 1e-4;
};

struct GibbsConfig {
  int iterations = 10'000;  // M
  int burn_in = 2'000;      // M0, discarded from all chain summaries
  RngState rng;
};

/// Recorded Gibbs draws. err_draws is M x (K+1); row m holds the Err vector
/// of iteration m, with mu_draws[m] and tau2_draws[m] the hyperparameter
/// draws of the same iteration.
struct PosteriorChain {
  Eigen::MatrixXd err_draws;
  Eigen::VectorXd mu_draws;
  Eigen::VectorXd tau2_draws;
  int burn_in = 0;
};

struct Tau2Estimate {
  double value = 0.0;
  bool clipped = false;  // true when the raw moment value was negative
};

struct PerformanceReport {
  LossKind loss_kind = LossKind::mspe;
  double naive = 0.0;
  double cv = 0.0;
  double eb = 0.0;     // valid only when has_eb
  double bayes = 0.0;  // valid only when has_bayes
  bool has_eb = false;
  bool has_bayes = false;
  double ci_lo = 0.0;  // valid only when has_bayes
  double ci_hi = 0.0;
  double alpha = 0.05;
  double mu_hat = 0.0;
  double tau2_hat = 0.0;  // valid only when has_eb
  bool tau2_clipped = false;
  int n_splits = 0;  // K+1
  int nonconverged_fits = 0;
};

/// Test-set estimate of the designated split: estimates[0].
double naive_estimate(const EstimateEnsemble& ensemble);

/// Random-split cross-validation estimate: mean of all K+1 estimates.
double cv_estimate(const EstimateEnsemble& ensemble);

/// Pairwise moment estimator of the between-split variance, computed from the
/// raw (non-compound-symmetrized) covariance matrix. A negative raw value is
/// clipped to zero and flagged.
Tau2Estimate tau2_moment(const EstimateEnsemble& ensemble);

/// Precision-weighted normal-normal combination of the naive estimate and the
/// cross-validation mean; collapses to the mean when tau2 is clipped at zero.
double eb_estimate(const EstimateEnsemble& ensemble);

/// Shrinkage matrix B = tau2 (tau2 I + Sigma)^-1, computed by a literal
/// linear solve. Exposed for identity checks against the sampler's internal
/// spectral form.
Eigen::MatrixXd shrinkage_matrix(const Eigen::MatrixXd& sigma, double tau2);

/// Closed-form B for a compound-symmetric Sigma with the given diagonal and
/// off-diagonal values.
Eigen::MatrixXd shrinkage_matrix_compound(Eigen::Index dim, double diag, double offdiag, double tau2);

/// Sampler for the conditional draw of the true-performance vector given
/// (mu0, tau0^2) and the estimate vector:
///   Err | . ~ N(mu0 1 + B (err_hat - mu0 1), tau0^2 (I - B)),
/// the normal-normal conjugate posterior (tau0^2 (I - B) = B Sigma).
/// The covariance factorization is precomputed once. Compound-symmetric
/// matrices take a two-eigenspace closed form (O(K) per draw); anything else
/// goes through a symmetrized eigendecomposition. Negative eigenvalues of
/// Sigma are clamped to zero before use, which keeps the conditional
/// covariance positive semidefinite by construction.
class ErrConditional {
 public:
  explicit ErrConditional(const Eigen::MatrixXd& sigma);

  Eigen::VectorXd draw(const Eigen::VectorXd& err_hat, double mu0, double tau2, Rng& rng) const;

  Eigen::MatrixXd shrinkage(double tau2) const;
  Eigen::MatrixXd conditional_cov(double tau2) const;
  bool compound_symmetric() const { return cs_; }

 private:
  Eigen::Index dim_;
  bool cs_ = false;
  double cs_lambda_ones_ = 0.0;   // eigenvalue on the all-ones direction
  double cs_lambda_rest_ = 0.0;   // eigenvalue on its complement
  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_;       // clamped at zero
};

/// Full Gibbs sampler alternating the conditional Err draw with the conjugate
/// Normal-Gamma update of (mu0, tau0^2). Expects the compound-symmetrized
/// covariance (the raw matrix also works, at O(K^2) per iteration).
PosteriorChain gibbs_run(const EstimateEnsemble& ensemble, const PriorSpec& prior, const GibbsConfig& cfg);

/// Posterior mean of Err_0 over the post-burn-in draws.
double bayes_estimate(const PosteriorChain& chain);

/// Equal-tailed credible interval for Err_0 from post-burn-in draws.
/// Quantile rule pinned to Hazen's (h = n p + 1/2, linear interpolation).
std::pair<double, double> credible_interval(const PosteriorChain& chain, double alpha);

/// Hazen quantile of a sample (copied and sorted internally).
double sample_quantile(std::vector<double> values, double p);

/// Runs the complete estimation stack on per-split evaluations: raw Sigma for
/// the moment/EB path, compound-symmetric Sigma for the Gibbs path. With a
/// single split only the naive/cv entries are populated. The chain is
/// optionally exported for diagnostics.
PerformanceReport full_report(const std::vector<SplitEvaluation>& evals, const PriorSpec& prior,
                              const GibbsConfig& cfg, double alpha, PosteriorChain* chain_out = nullptr);

}  // namespace cvshrink
