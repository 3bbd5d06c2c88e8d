#include "cvshrink/learners.hpp"

#include <cmath>

namespace cvshrink {

namespace {

constexpr double kProbClamp = 1e-5;  // glmnet-style clamp on fitted probabilities

struct WorkingDesign {
  Eigen::MatrixXd W;        // centered (and possibly scaled) features
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;    // ones when standardize is off
};

WorkingDesign prepare_design(const Eigen::MatrixXd& X, bool standardize) {
  WorkingDesign d;
  const ColumnScaling cs = column_scaling(X);
  d.mean = cs.mean;
  d.scale = standardize ? cs.scale : Eigen::VectorXd::Ones(X.cols());
  if (standardize) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      if (cs.scale[j] == 0.0)
        throw Error(ErrorCode::DegenerateInput,
                    "feature column " + std::to_string(j) + " is constant; cannot standardize");
    }
  }
  d.W = (X.rowwise() - d.mean.transpose()).array().rowwise() / d.scale.transpose().array();
  return d;
}

// Coefficients come back on the working scale; undo centering/scaling.
void finish_model(LinearModel& model, const WorkingDesign& d, double intercept_w,
                  const Eigen::VectorXd& beta_w) {
  model.coefficients = beta_w.array() / d.scale.array();
  model.intercept = intercept_w - model.coefficients.dot(d.mean);
}

}  // namespace

ColumnScaling column_scaling(const Eigen::MatrixXd& X) {
  ColumnScaling cs;
  const double n = static_cast<double>(X.rows());
  cs.mean = X.colwise().mean();
  cs.scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = (X.col(j).array() - cs.mean[j]).square().sum() / n;
    cs.scale[j] = std::sqrt(var);
  }
  return cs;
}

LinearModel fit_lasso_linear(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LearnerSpec& spec) {
  if (X.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "rows of X and y differ");
  if (X.rows() < 1) throw Error(ErrorCode::InvalidSizes, "empty training set");
  if (spec.tol <= 0.0 || spec.max_iter < 1) throw Error(ErrorCode::ConfigError, "tol > 0 and max_iter >= 1 required");

  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const WorkingDesign d = prepare_design(X, spec.standardize);

  const double ybar = y.mean();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd resid = y.array() - ybar;  // residual of centered problem

  Eigen::VectorXd col_norm2(p);
  for (Eigen::Index j = 0; j < p; ++j) col_norm2[j] = d.W.col(j).squaredNorm() * inv_n;

  LinearModel model;
  model.task = Task::continuous;
  model.lambda = spec.lambda;
  model.converged = false;
  for (int sweep = 1; sweep <= spec.max_iter; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_norm2[j] <= 0.0) continue;  // constant column, coefficient stays 0
      const double rho = inv_n * d.W.col(j).dot(resid) + beta[j] * col_norm2[j];
      const double updated = soft_threshold(rho, spec.lambda) / col_norm2[j];
      const double delta = updated - beta[j];
      if (delta != 0.0) {
        resid -= delta * d.W.col(j);
        beta[j] = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    model.iterations = sweep;
    if (max_delta < spec.tol) {
      model.converged = true;
      break;
    }
  }
  finish_model(model, d, ybar, beta);
  return model;
}

LinearModel fit_lasso_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LearnerSpec& spec) {
  if (X.rows() != y.size()) throw Error(ErrorCode::DimensionMismatch, "rows of X and y differ");
  if (X.rows() < 1) throw Error(ErrorCode::InvalidSizes, "empty training set");
  if (spec.tol <= 0.0 || spec.max_iter < 1) throw Error(ErrorCode::ConfigError, "tol > 0 and max_iter >= 1 required");

  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double ybar = y.mean();
  if (ybar == 0.0 || ybar == 1.0)
    throw Error(ErrorCode::SingleClassTraining, "all training targets identical");

  const WorkingDesign d = prepare_design(X, spec.standardize);

  double alpha = logit(ybar);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(n, alpha);

  LinearModel model;
  model.task = Task::binary;
  model.lambda = spec.lambda;
  model.converged = false;
  for (int outer = 1; outer <= spec.max_iter; ++outer) {
    // Quadratic approximation at the current fit.
    Eigen::VectorXd prob = eta.unaryExpr([](double e) {
      const double p = expit(e);
      return std::min(1.0 - kProbClamp, std::max(kProbClamp, p));
    });
    Eigen::VectorXd w = prob.array() * (1.0 - prob.array());
    Eigen::VectorXd z = eta.array() + (y - prob).array() / w.array();

    const double sum_w = w.sum();
    Eigen::VectorXd denom(p);
    for (Eigen::Index j = 0; j < p; ++j) denom[j] = inv_n * d.W.col(j).cwiseProduct(w).dot(d.W.col(j));

    // Weighted lasso on the working response.
    Eigen::VectorXd resid = z - Eigen::VectorXd::Constant(n, alpha) - d.W * beta;
    double outer_delta = 0.0;
    for (int sweep = 0; sweep < 1000; ++sweep) {
      double max_delta = 0.0;
      const double a_new = alpha + w.dot(resid) / sum_w;
      const double da = a_new - alpha;
      if (da != 0.0) {
        resid.array() -= da;
        alpha = a_new;
        max_delta = std::abs(da);
      }
      for (Eigen::Index j = 0; j < p; ++j) {
        if (denom[j] <= 0.0) continue;
        const double rho = inv_n * d.W.col(j).cwiseProduct(w).dot(resid) + beta[j] * denom[j];
        const double updated = soft_threshold(rho, spec.lambda) / denom[j];
        const double delta = updated - beta[j];
        if (delta != 0.0) {
          resid -= delta * d.W.col(j);
          beta[j] = updated;
          max_delta = std::max(max_delta, std::abs(delta));
        }
      }
      outer_delta = std::max(outer_delta, max_delta);
      if (max_delta < spec.tol) break;
    }

    eta = Eigen::VectorXd::Constant(n, alpha) + d.W * beta;
    model.iterations = outer;
    if (outer_delta < spec.tol) {
      model.converged = true;
      break;
    }
  }
  finish_model(model, d, alpha, beta);
  return model;
}

LinearModel fit_on_split(const Dataset& data, const SplitPlan& split, const LearnerSpec& spec) {
  const Dataset train = subset_rows(data, split.train_indices);
  switch (spec.kind) {
    case LearnerKind::lasso_linear:
      if (data.task != Task::continuous)
        throw Error(ErrorCode::ConfigError, "lasso_linear requires a continuous task");
      return fit_lasso_linear(train.features, train.targets, spec);
    case LearnerKind::lasso_logistic:
      if (data.task != Task::binary)
        throw Error(ErrorCode::ConfigError, "lasso_logistic requires a binary task");
      return fit_lasso_logistic(train.features, train.targets, spec);
  }
  throw Error(ErrorCode::ConfigError, "unknown learner kind");
}

double predict_score(const LinearModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.coefficients.size())
    throw Error(ErrorCode::DimensionMismatch, "feature vector length " + std::to_string(z.size()) +
                                                  " != p=" + std::to_string(model.coefficients.size()));
  return model.intercept + model.coefficients.dot(z);
}

Eigen::VectorXd predict_score(const LinearModel& model, const Eigen::MatrixXd& Z) {
  if (Z.cols() != model.coefficients.size())
    throw Error(ErrorCode::DimensionMismatch, "feature matrix has " + std::to_string(Z.cols()) +
                                                  " columns, expected " + std::to_string(model.coefficients.size()));
  return (Z * model.coefficients).array() + model.intercept;
}

}  // namespace cvshrink
