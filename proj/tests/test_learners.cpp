#include "doctest.h"

#include "cvshrink/learners.hpp"
#include "cvshrink/simulation.hpp"
#include "oracles.hpp"

using namespace cvshrink;

namespace {

Eigen::MatrixXd standardized(const Eigen::MatrixXd& X) {
  const ColumnScaling cs = column_scaling(X);
  return (X.rowwise() - cs.mean.transpose()).array().rowwise() / cs.scale.transpose().array();
}

// Max violation of the stationarity conditions on the standardized design.
double kkt_violation(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LinearModel& model) {
  const Eigen::MatrixXd W = standardized(X);
  const ColumnScaling cs = column_scaling(X);
  const Eigen::VectorXd beta_std = model.coefficients.array() * cs.scale.array();
  const Eigen::VectorXd resid = y.array() - (X * model.coefficients).array() - model.intercept;
  const double n = static_cast<double>(X.rows());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double g = W.col(j).dot(resid) / n;
    if (beta_std[j] == 0.0) {
      worst = std::max(worst, std::abs(g) - model.lambda);
    } else {
      worst = std::max(worst, std::abs(g - model.lambda * (beta_std[j] > 0 ? 1.0 : -1.0)));
    }
  }
  return worst;
}

Eigen::MatrixXd random_matrix(int n, int p, Rng& rng) {
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = rng.normal();
  return X;
}

}  // namespace

TEST_CASE("lasso linear: full shrinkage above the max-gradient threshold") {
  Rng rng(100, 0);
  const Eigen::MatrixXd X = random_matrix(40, 5, rng);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y[i] = 0.7 * X(i, 0) - 0.2 * X(i, 3) + rng.normal();

  const Eigen::MatrixXd W = standardized(X);
  const double ybar = y.mean();
  const double lambda_max =
      ((W.transpose() * (y.array() - ybar).matrix()) / 40.0).cwiseAbs().maxCoeff();

  LearnerSpec spec;
  spec.lambda = lambda_max * 1.0001;
  const LinearModel model = fit_lasso_linear(X, y, spec);
  CHECK(model.coefficients.isZero(0.0));
  CHECK(model.intercept == doctest::Approx(ybar).epsilon(1e-12));
}

TEST_CASE("lasso linear: single standardized feature matches soft-threshold closed form") {
  Rng rng(101, 0);
  const int n = 200;
  Eigen::MatrixXd X = random_matrix(n, 1, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = 0.4 * X(i, 0) + rng.normal();

  const Eigen::MatrixXd W = standardized(X);
  const double rho = W.col(0).dot((y.array() - y.mean()).matrix()) / n;
  const double expected_std = soft_threshold(rho, 0.1);

  LearnerSpec spec;
  spec.lambda = 0.1;
  const LinearModel model = fit_lasso_linear(X, y, spec);
  const double fitted_std = model.coefficients[0] * column_scaling(X).scale[0];
  CHECK(fitted_std == doctest::Approx(expected_std).epsilon(1e-8));
}

TEST_CASE("lasso linear: lambda=0 on well-conditioned data reproduces least squares") {
  Rng rng(102, 0);
  const Eigen::MatrixXd X = random_matrix(120, 8, rng);
  Eigen::VectorXd y(120);
  for (int i = 0; i < 120; ++i) y[i] = 1.5 + X.row(i).head(3).sum() + 0.5 * rng.normal();

  LearnerSpec spec;
  spec.lambda = 0.0;
  const LinearModel model = fit_lasso_linear(X, y, spec);
  const auto ls = oracles::least_squares(X, y);
  CHECK(model.intercept == doctest::Approx(ls.intercept).epsilon(1e-6));
  for (Eigen::Index j = 0; j < 8; ++j)
    CHECK(model.coefficients[j] == doctest::Approx(ls.coefficients[j]).epsilon(1e-6));
}

TEST_CASE("lasso linear: KKT conditions hold at 10*tol") {
  Rng rng(103, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 60 + 10 * trial;
    const Eigen::MatrixXd X = random_matrix(n, 12, rng);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = X(i, 0) - 0.3 * X(i, 5) + rng.normal();
    LearnerSpec spec;
    spec.lambda = 0.05 + 0.02 * trial;
    const LinearModel model = fit_lasso_linear(X, y, spec);
    CHECK(model.converged);
    CHECK(kkt_violation(X, y, model) <= 10 * spec.tol);
  }
}

TEST_CASE("lasso linear: objective non-increasing across sweeps") {
  Rng rng(104, 0);
  const Eigen::MatrixXd X = random_matrix(80, 10, rng);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) y[i] = X(i, 1) + rng.normal();

  double prev = std::numeric_limits<double>::infinity();
  for (int sweeps = 1; sweeps <= 12; ++sweeps) {
    LearnerSpec spec;
    spec.lambda = 0.08;
    spec.max_iter = sweeps;
    spec.tol = 1e-300;  // force exactly `sweeps` passes
    const LinearModel model = fit_lasso_linear(X, y, spec);
    const double obj = oracles::lasso_objective_std(X, y, model.intercept, model.coefficients, 0.08);
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("lasso linear: support recovery on the sparse generator, against ISTA") {
  // 100 seeds of the n=150/p=50 generator, lambda=0.10 fitted on n1=100 rows:
  // the four true coordinates should be active nearly always, the rest mostly
  // zero, and an independent proximal-gradient solver must agree.
  SimConfig cfg;
  cfg.n = 100;
  int active_hits = 0;
  int checked_objectives = 0;
  int noise_zero_total = 0;
  for (int seed = 0; seed < 100; ++seed) {
    cfg.seed = RngState{static_cast<std::uint64_t>(seed), 900};
    Rng rng(cfg.seed);
    const Dataset data = gen_continuous(cfg, rng);
    LearnerSpec spec;
    spec.lambda = 0.10;
    const LinearModel model = fit_lasso_linear(data.features, data.targets, spec);

    bool all_active = true;
    for (int j = 0; j < 4; ++j) all_active &= model.coefficients[j] != 0.0;
    if (all_active) ++active_hits;
    for (int j = 4; j < 50; ++j) noise_zero_total += model.coefficients[j] == 0.0 ? 1 : 0;

    if (seed < 10) {  // objective comparison on a subsample keeps this fast
      const auto ista = oracles::ista_lasso(data.features, data.targets, 0.10);
      const double obj_cd =
          oracles::lasso_objective_std(data.features, data.targets, model.intercept, model.coefficients, 0.10);
      const double obj_ista =
          oracles::lasso_objective_std(data.features, data.targets, ista.intercept, ista.coefficients, 0.10);
      CHECK(obj_cd <= obj_ista + 1e-7);
      CHECK(std::abs(obj_cd - obj_ista) < 1e-6);
      ++checked_objectives;
    }
  }
  CHECK(checked_objectives == 10);
  CHECK(active_hits >= 90);
  // "most" of the 46 noise coordinates vanish: require 60% zero on average.
  CHECK(noise_zero_total >= 100 * 46 * 6 / 10);
}

TEST_CASE("lasso logistic: full shrinkage gives slope 0 and intercept logit(ybar)") {
  Rng rng(105, 0);
  const int n = 80;
  const Eigen::MatrixXd X = random_matrix(n, 4, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.uniform01() < 0.4 ? 1.0 : 0.0;

  const Eigen::MatrixXd W = standardized(X);
  const double ybar = y.mean();
  const double lambda_max =
      ((W.transpose() * (y.array() - ybar).matrix()) / n).cwiseAbs().maxCoeff();

  LearnerSpec spec;
  spec.kind = LearnerKind::lasso_logistic;
  spec.lambda = lambda_max * 1.001;
  const LinearModel model = fit_lasso_logistic(X, y, spec);
  CHECK(model.coefficients.isZero(0.0));
  CHECK(model.intercept == doctest::Approx(logit(ybar)).epsilon(1e-6));
}

TEST_CASE("lasso logistic: symmetric data gives intercept near zero") {
  Rng rng(106, 0);
  const int half = 60;
  Eigen::MatrixXd X(2 * half, 3);
  Eigen::VectorXd y(2 * half);
  for (int i = 0; i < half; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.normal();
    y[i] = X(i, 0) + 0.5 * rng.normal() > 0 ? 1.0 : 0.0;
    X.row(half + i) = -X.row(i);  // mirrored copy with flipped label
    y[half + i] = 1.0 - y[i];
  }
  LearnerSpec spec;
  spec.kind = LearnerKind::lasso_logistic;
  spec.lambda = 0.05;
  const LinearModel model = fit_lasso_logistic(X, y, spec);
  CHECK(std::abs(model.intercept) < 1e-6);
}

TEST_CASE("lasso logistic: lambda=0 matches the Newton MLE") {
  Rng rng(107, 0);
  const int n = 400;
  const Eigen::MatrixXd X = random_matrix(n, 3, rng);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y[i] = expit(0.3 + 0.8 * X(i, 0) - 0.5 * X(i, 2)) > rng.uniform01() ? 1.0 : 0.0;

  LearnerSpec spec;
  spec.kind = LearnerKind::lasso_logistic;
  spec.lambda = 0.0;
  const LinearModel model = fit_lasso_logistic(X, y, spec);
  const auto mle = oracles::logistic_mle(X, y);
  CHECK(model.intercept == doctest::Approx(mle.intercept).epsilon(1e-4));
  for (Eigen::Index j = 0; j < 3; ++j)
    CHECK(model.coefficients[j] == doctest::Approx(mle.coefficients[j]).epsilon(1e-4));
}

TEST_CASE("lasso logistic: binary generator fit scores above chance on training data") {
  SimConfig cfg;
  cfg.task = Task::binary;
  cfg.n = 100;
  cfg.seed = RngState{31, 901};
  Rng rng(cfg.seed);
  const Dataset data = gen_binary(cfg, rng);
  LearnerSpec spec;
  spec.kind = LearnerKind::lasso_logistic;
  spec.lambda = 0.13;
  const LinearModel model = fit_lasso_logistic(data.features, data.targets, spec);
  const Eigen::VectorXd scores = predict_score(model, data.features);
  std::vector<double> s(scores.data(), scores.data() + scores.size());
  std::vector<int> labels(data.targets.size());
  for (Eigen::Index i = 0; i < data.targets.size(); ++i) labels[static_cast<std::size_t>(i)] = data.targets[i] == 1.0;
  CHECK(oracles::brute_force_cindex(s, labels) > 0.5);
}

TEST_CASE("lasso logistic: single-class training is an error") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
  LearnerSpec spec;
  spec.kind = LearnerKind::lasso_logistic;
  try {
    fit_lasso_logistic(X, y, spec);
    FAIL("expected SingleClassTraining");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClassTraining);
  }
}

TEST_CASE("constant column with standardization is DegenerateInput") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(12, 3);
  X.col(1).setConstant(2.0);
  Eigen::VectorXd y = X.col(0);
  LearnerSpec spec;
  try {
    fit_lasso_linear(X, y, spec);
    FAIL("expected DegenerateInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
  // Without standardization the column is tolerated and its coefficient stays 0.
  spec.standardize = false;
  const LinearModel model = fit_lasso_linear(X, y, spec);
  CHECK(model.coefficients[1] == 0.0);
}

TEST_CASE("predict_score basics") {
  LinearModel model;
  model.coefficients = Eigen::VectorXd::Zero(3);
  const Eigen::VectorXd any = Eigen::VectorXd::Random(3);
  CHECK(predict_score(model, any) == 0.0);

  model.intercept = 1.0;
  model.coefficients << 2.0, 0.0, 0.0;
  Eigen::VectorXd z(3);
  z << 3.0, -1.0, 4.0;
  CHECK(predict_score(model, z) == 7.0);
  CHECK(expit(predict_score(model, z)) == doctest::Approx(1.0 / (1.0 + std::exp(-7.0))));

  const Eigen::VectorXd short_vec = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd wide_mat = Eigen::MatrixXd::Zero(4, 5);
  CHECK_THROWS_AS(predict_score(model, short_vec), Error);
  CHECK_THROWS_AS(predict_score(model, wide_mat), Error);
}
