#include "cvshrink/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace cvshrink {

namespace {

void require_splits(const EstimateEnsemble& ensemble, Eigen::Index min_dim) {
  if (ensemble.size() < min_dim)
    throw Error(ErrorCode::TooFewSplits, "need at least " + std::to_string(min_dim) + " splits, got " +
                                             std::to_string(ensemble.size()));
}

bool is_compound_symmetric(const Eigen::MatrixXd& sigma) {
  const Eigen::Index dim = sigma.rows();
  if (dim < 2) return false;
  const double d = sigma(0, 0);
  const double c = sigma(0, 1);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      if (sigma(i, j) != (i == j ? d : c)) return false;
  return true;
}

}  // namespace

double naive_estimate(const EstimateEnsemble& ensemble) {
  require_splits(ensemble, 1);
  return ensemble.estimates[0];
}

double cv_estimate(const EstimateEnsemble& ensemble) {
  require_splits(ensemble, 1);
  return ensemble.estimates.mean();
}

Tau2Estimate tau2_moment(const EstimateEnsemble& ensemble) {
  require_splits(ensemble, 2);
  const Eigen::Index dim = ensemble.size();  // K+1
  const double K = static_cast<double>(dim - 1);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const double diff = ensemble.estimates[i] - ensemble.estimates[j];
      sum += diff * diff - ensemble.sigma(i, i) - ensemble.sigma(j, j) + 2.0 * ensemble.sigma(i, j);
    }
  }
  const double raw = sum / (K * (K + 1.0));
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

double eb_estimate(const EstimateEnsemble& ensemble) {
  require_splits(ensemble, 2);
  const double err0 = ensemble.estimates[0];
  const double mu = ensemble.estimates.mean();
  const double sigma0_sq = ensemble.sigma(0, 0);
  const Tau2Estimate tau2 = tau2_moment(ensemble);
  if (sigma0_sq == 0.0 && tau2.value == 0.0)
    throw Error(ErrorCode::DegenerateVariance, "sigma0^2 and tau0^2 are both zero");
  if (tau2.value == 0.0) return mu;       // full pooling
  if (sigma0_sq == 0.0) return err0;      // exact naive estimate, no pooling
  const double w0 = 1.0 / sigma0_sq;
  const double wt = 1.0 / tau2.value;
  return (w0 * err0 + wt * mu) / (w0 + wt);
}

Eigen::MatrixXd shrinkage_matrix(const Eigen::MatrixXd& sigma, double tau2) {
  const Eigen::Index dim = sigma.rows();
  Eigen::MatrixXd lhs = sigma;
  lhs.diagonal().array() += tau2;
  return lhs.ldlt().solve(tau2 * Eigen::MatrixXd::Identity(dim, dim));
}

Eigen::MatrixXd shrinkage_matrix_compound(Eigen::Index dim, double diag, double offdiag, double tau2) {
  const double lambda_ones = diag + static_cast<double>(dim - 1) * offdiag;
  const double lambda_rest = diag - offdiag;
  const double b_ones = tau2 / (tau2 + lambda_ones);
  const double b_rest = tau2 / (tau2 + lambda_rest);
  Eigen::MatrixXd B = Eigen::MatrixXd::Constant(dim, dim, (b_ones - b_rest) / static_cast<double>(dim));
  B.diagonal().array() += b_rest;
  return B;
}

ErrConditional::ErrConditional(const Eigen::MatrixXd& sigma) : dim_(sigma.rows()) {
  if (dim_ < 1 || sigma.cols() != dim_)
    throw Error(ErrorCode::DimensionMismatch, "covariance matrix must be square and nonempty");
  if (!sigma.allFinite()) throw Error(ErrorCode::NumericalFailure, "covariance matrix has non-finite entries");
  if (is_compound_symmetric(sigma)) {
    cs_ = true;
    const double d = sigma(0, 0);
    const double c = sigma(0, 1);
    cs_lambda_ones_ = std::max(0.0, d + static_cast<double>(dim_ - 1) * c);
    cs_lambda_rest_ = std::max(0.0, d - c);
    return;
  }
  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::NumericalFailure, "eigendecomposition of the covariance matrix failed");
  eigvecs_ = solver.eigenvectors();
  eigvals_ = solver.eigenvalues().cwiseMax(0.0);
}

Eigen::VectorXd ErrConditional::draw(const Eigen::VectorXd& err_hat, double mu0, double tau2,
                                     Rng& rng) const {
  if (err_hat.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "estimate vector length mismatch");
  if (!(tau2 > 0.0)) throw Error(ErrorCode::NumericalFailure, "tau2 must be positive in the conditional draw");
  Eigen::VectorXd g(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) g[i] = rng.normal();
  const Eigen::VectorXd centered = err_hat.array() - mu0;

  if (cs_) {
    const double b_ones = tau2 / (tau2 + cs_lambda_ones_);
    const double b_rest = tau2 / (tau2 + cs_lambda_rest_);
    const double sd_ones = std::sqrt(b_ones * cs_lambda_ones_);
    const double sd_rest = std::sqrt(b_rest * cs_lambda_rest_);
    const double cbar = centered.mean();
    const double gbar = g.mean();
    Eigen::VectorXd out(dim_);
    out.array() = mu0 + b_ones * cbar + b_rest * (centered.array() - cbar) + sd_ones * gbar +
                  sd_rest * (g.array() - gbar);
    return out;
  }

  const Eigen::VectorXd proj = eigvecs_.transpose() * centered;
  Eigen::VectorXd mixed(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) {
    const double b = tau2 / (tau2 + eigvals_[i]);
    mixed[i] = b * proj[i] + std::sqrt(b * eigvals_[i]) * g[i];
  }
  return (eigvecs_ * mixed).array() + mu0;
}

Eigen::MatrixXd ErrConditional::shrinkage(double tau2) const {
  if (cs_) {
    // Reassemble from the clamped eigenvalues; equals the closed form when
    // the matrix was positive semidefinite to begin with.
    const double b_ones = tau2 / (tau2 + cs_lambda_ones_);
    const double b_rest = tau2 / (tau2 + cs_lambda_rest_);
    Eigen::MatrixXd B = Eigen::MatrixXd::Constant(dim_, dim_, (b_ones - b_rest) / static_cast<double>(dim_));
    B.diagonal().array() += b_rest;
    return B;
  }
  Eigen::VectorXd b(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) b[i] = tau2 / (tau2 + eigvals_[i]);
  return eigvecs_ * b.asDiagonal() * eigvecs_.transpose();
}

Eigen::MatrixXd ErrConditional::conditional_cov(double tau2) const {
  if (cs_) {
    const double c_ones = tau2 * cs_lambda_ones_ / (tau2 + cs_lambda_ones_);
    const double c_rest = tau2 * cs_lambda_rest_ / (tau2 + cs_lambda_rest_);
    Eigen::MatrixXd C = Eigen::MatrixXd::Constant(dim_, dim_, (c_ones - c_rest) / static_cast<double>(dim_));
    C.diagonal().array() += c_rest;
    return C;
  }
  Eigen::VectorXd c(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) c[i] = tau2 * eigvals_[i] / (tau2 + eigvals_[i]);
  return eigvecs_ * c.asDiagonal() * eigvecs_.transpose();
}

PosteriorChain gibbs_run(const EstimateEnsemble& ensemble, const PriorSpec& prior, const GibbsConfig& cfg) {
  require_splits(ensemble, 2);
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.iterations)
    throw Error(ErrorCode::ConfigError, "need 0 <= burn_in < iterations");
  if (!(prior.a0 > 0.0 && prior.b0 > 0.0 && prior.kappa0 > 0.0))
    throw Error(ErrorCode::ConfigError, "prior hyperparameters must be positive");

  const Eigen::Index dim = ensemble.size();
  const ErrConditional conditional(ensemble.sigma);
  Rng rng(cfg.rng);

  double mu = cv_estimate(ensemble);
  const Tau2Estimate moment = tau2_moment(ensemble);
  double tau2 = std::max(moment.value, 1e-8 * mu * mu + 1e-12);

  const double a1 = prior.a0 + static_cast<double>(dim) / 2.0;
  const double kappa1 = prior.kappa0 + static_cast<double>(dim);

  PosteriorChain chain;
  chain.burn_in = cfg.burn_in;
  chain.err_draws.resize(cfg.iterations, dim);
  chain.mu_draws.resize(cfg.iterations);
  chain.tau2_draws.resize(cfg.iterations);

  for (int m = 0; m < cfg.iterations; ++m) {
    const Eigen::VectorXd err = conditional.draw(ensemble.estimates, mu, tau2, rng);
    const double err_bar = err.mean();
    const double ss = (err.array() - err_bar).square().sum();
    const double b1 =
        prior.b0 + 0.5 * ss + prior.kappa0 * static_cast<double>(dim) / (2.0 * kappa1) * err_bar * err_bar;
    tau2 = 1.0 / rng.gamma(a1, b1);
    const double mu1 = static_cast<double>(dim) * err_bar / kappa1;
    mu = rng.normal(mu1, std::sqrt(tau2 / kappa1));
    chain.err_draws.row(m) = err;
    chain.mu_draws[m] = mu;
    chain.tau2_draws[m] = tau2;
  }
  if (!chain.err_draws.allFinite() || !chain.mu_draws.allFinite() || !chain.tau2_draws.allFinite())
    throw Error(ErrorCode::NumericalFailure, "Gibbs chain produced non-finite draws");
  return chain;
}

double bayes_estimate(const PosteriorChain& chain) {
  const Eigen::Index kept = chain.err_draws.rows() - chain.burn_in;
  if (kept < 1) throw Error(ErrorCode::InsufficientDraws, "no post-burn-in draws");
  return chain.err_draws.col(0).tail(kept).mean();
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::InsufficientDraws, "empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double h = std::clamp(n * p + 0.5, 1.0, n);
  const auto lo = static_cast<std::size_t>(std::floor(h)) - 1;
  const double frac = h - std::floor(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::pair<double, double> credible_interval(const PosteriorChain& chain, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::ConfigError, "alpha must be in (0,1)");
  const Eigen::Index kept = chain.err_draws.rows() - chain.burn_in;
  if (kept < 40)
    throw Error(ErrorCode::InsufficientDraws,
                "need at least 40 post-burn-in draws, have " + std::to_string(kept));
  std::vector<double> draws(static_cast<std::size_t>(kept));
  for (Eigen::Index i = 0; i < kept; ++i) draws[static_cast<std::size_t>(i)] = chain.err_draws(chain.burn_in + i, 0);
  const double lo = sample_quantile(draws, alpha / 2.0);
  const double hi = sample_quantile(std::move(draws), 1.0 - alpha / 2.0);
  return {lo, hi};
}

PerformanceReport full_report(const std::vector<SplitEvaluation>& evals, const PriorSpec& prior,
                              const GibbsConfig& cfg, double alpha, PosteriorChain* chain_out) {
  const EstimateEnsemble raw = build_sigma(evals);
  PerformanceReport report;
  report.loss_kind = raw.loss_kind;
  report.alpha = alpha;
  report.n_splits = static_cast<int>(raw.size());
  report.naive = naive_estimate(raw);
  report.cv = cv_estimate(raw);
  report.mu_hat = report.cv;
  for (const auto& eval : evals)
    if (!eval.model_converged) ++report.nonconverged_fits;

  if (raw.size() >= 2) {
    const Tau2Estimate tau2 = tau2_moment(raw);
    report.tau2_hat = tau2.value;
    report.tau2_clipped = tau2.clipped;
    report.eb = eb_estimate(raw);
    report.has_eb = true;

    const EstimateEnsemble cs = compound_symmetrize(raw);
    const PosteriorChain chain = gibbs_run(cs, prior, cfg);
    report.bayes = bayes_estimate(chain);
    std::tie(report.ci_lo, report.ci_hi) = credible_interval(chain, alpha);
    report.has_bayes = true;
    if (chain_out != nullptr) *chain_out = chain;
  }
  return report;
}

}  // namespace cvshrink
