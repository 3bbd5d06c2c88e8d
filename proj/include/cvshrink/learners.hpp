#pragma once

#include <Eigen/Dense>

#include "cvshrink/core.hpp"

namespace cvshrink {

enum class LearnerKind { lasso_linear, lasso_logistic };

/// Configuration of a penalized fit. Penalty convention is pinned as
///   (1/n1) * loss + lambda * ||beta||_1
/// with mean squared-error loss halved for the linear case and average
/// negative log-likelihood for the logistic case; the intercept is never
/// penalized. Features are standardized internally (population sd) and the
/// coefficients back-transformed, so lambda is transferable across datasets.
struct LearnerSpec {
  LearnerKind kind = LearnerKind::lasso_linear;
  double lambda = 0.0;
  int max_iter = 10'000;
  double tol = 1e-7;
  bool standardize = true;
};

/// Linear score model: score(z) = intercept + coefficients . z.
/// For binary tasks the score is the linear risk score; the estimated
/// probability is expit(score).
struct LinearModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  Task task = Task::continuous;
  double lambda = 0.0;
  bool converged = true;
  int iterations = 0;
};

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Column means and population standard deviations of a design matrix,
/// matching what the fitters use internally.
struct ColumnScaling {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // population sd; 0 marks a constant column
};

ColumnScaling column_scaling(const Eigen::MatrixXd& X);

/// Cyclic coordinate-descent lasso for (1/(2 n1)) sum (y - a - b.z)^2 + lambda ||b||_1.
/// Non-convergence within max_iter sweeps is flagged on the model, not thrown.
LinearModel fit_lasso_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LearnerSpec& spec);

/// l1-penalized logistic regression via iteratively reweighted least squares
/// with a coordinate-descent inner solver. Throws SingleClassTraining when
/// all targets coincide.
LinearModel fit_lasso_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LearnerSpec& spec);

/// Trains the learner named by spec.kind on the training rows of one split.
LinearModel fit_on_split(const Dataset& data, const SplitPlan& split, const LearnerSpec& spec);

double predict_score(const LinearModel& model, const Eigen::VectorXd& z);
Eigen::VectorXd predict_score(const LinearModel& model, const Eigen::MatrixXd& Z);

}  // namespace cvshrink
