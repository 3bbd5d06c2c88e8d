#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cvshrink/core.hpp"
#include "cvshrink/learners.hpp"

namespace cvshrink {

enum class LossKind { mspe, cindex };

inline const char* to_string(LossKind kind) { return kind == LossKind::mspe ? "mspe" : "cindex"; }

/// Test-set summary for one split: per-observation scores plus the stored
/// quantities the covariance estimators need (squared-error losses for the
/// MSPE path, class-wise sweep means for the c-index path). Covariances are
/// always computed from these stored values, never by refitting.
struct SplitEvaluation {
  SplitPlan split;
  LossKind kind = LossKind::mspe;
  Eigen::VectorXd scores;             // aligned with split.test_indices
  Eigen::VectorXd losses;             // mspe only
  Eigen::VectorXd placements;         // cindex only: V_i (negatives) / W_j (positives)
  std::vector<std::uint8_t> labels;   // cindex only: test labels
  double err_hat = 0.0;
  double var_hat = 0.0;
  int m0 = 0;                         // negatives in test set (binary)
  int m1 = 0;                         // positives in test set (binary)
  int n2 = 0;
  std::uint64_t data_fingerprint = 0;
  bool model_converged = true;
};

/// Estimate vector (err_0..err_K) with its (K+1)x(K+1) covariance matrix.
struct EstimateEnsemble {
  Eigen::VectorXd estimates;
  Eigen::MatrixXd sigma;
  LossKind loss_kind = LossKind::mspe;

  Eigen::Index size() const { return estimates.size(); }
};

/// Mean squared prediction error over the test set, with the per-observation
/// losses retained and var_hat = (1/n2^2) sum (loss_i - err_hat)^2.
SplitEvaluation evaluate_mspe(const LinearModel& model, const Dataset& data, const SplitPlan& split);

/// Covariance of two MSPE estimates over the shared test observations:
/// (1/n2^2) sum over the intersection of centered loss products. Zero for
/// disjoint test sets; equals var_hat when both evaluations coincide.
double mspe_covariance(const SplitEvaluation& eval_k, const SplitEvaluation& eval_l);

/// Empirical c-index with the strict indicator 1{score_neg < score_pos}
/// (ties earn no credit). var_hat is the U-statistic variance.
SplitEvaluation evaluate_cindex(const LinearModel& model, const Dataset& data, const SplitPlan& split);

/// Two-component U-statistic covariance of two c-index estimates, summing
/// centered sweep-mean products over the shared negatives and shared
/// positives. Zero when both shared-class intersections are empty.
double cindex_covariance(const SplitEvaluation& eval_k, const SplitEvaluation& eval_l);

/// Assembles the estimate vector and full covariance matrix from per-split
/// evaluations; the result is exactly symmetric by construction.
EstimateEnsemble build_sigma(const std::vector<SplitEvaluation>& evals);

/// Compound-symmetric stabilization: diagonal replaced by the mean variance,
/// off-diagonals by the mean pairwise covariance. Idempotent; estimates are
/// left untouched.
EstimateEnsemble compound_symmetrize(const EstimateEnsemble& ensemble);

}  // namespace cvshrink
