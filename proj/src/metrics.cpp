#include "cvshrink/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace cvshrink {

namespace {

Eigen::MatrixXd test_features(const Dataset& data, const SplitPlan& split) {
  // The covariance estimators intersect test sets by a linear merge, so the
  // ascending-order invariant is load-bearing here.
  for (std::size_t i = 1; i < split.test_indices.size(); ++i)
    if (split.test_indices[i] <= split.test_indices[i - 1])
      throw Error(ErrorCode::DegenerateInput, "test indices must be strictly ascending");
  Eigen::MatrixXd Z(static_cast<Eigen::Index>(split.test_indices.size()), data.p());
  for (std::size_t i = 0; i < split.test_indices.size(); ++i) {
    if (split.test_indices[i] < 0 || split.test_indices[i] >= data.n())
      throw Error(ErrorCode::DimensionMismatch, "test index out of range");
    Z.row(static_cast<Eigen::Index>(i)) = data.features.row(split.test_indices[i]);
  }
  return Z;
}

void check_comparable(const SplitEvaluation& a, const SplitEvaluation& b) {
  if (a.kind != b.kind) throw Error(ErrorCode::MismatchedData, "loss kinds differ");
  if (a.data_fingerprint != b.data_fingerprint)
    throw Error(ErrorCode::MismatchedData, "evaluations come from different datasets");
  if (a.n2 != b.n2) throw Error(ErrorCode::MismatchedData, "test-set sizes differ");
}

// Walks the sorted test-index intersection, invoking fn(pos_in_a, pos_in_b).
template <typename Fn>
void for_shared_test_indices(const SplitEvaluation& a, const SplitEvaluation& b, Fn&& fn) {
  std::size_t i = 0, j = 0;
  const auto& ta = a.split.test_indices;
  const auto& tb = b.split.test_indices;
  while (i < ta.size() && j < tb.size()) {
    if (ta[i] < tb[j]) {
      ++i;
    } else if (tb[j] < ta[i]) {
      ++j;
    } else {
      fn(i, j);
      ++i;
      ++j;
    }
  }
}

double mean_or_common(const std::vector<double>& values) {
  // Exact when all entries coincide; keeps compound_symmetrize idempotent.
  bool all_equal = true;
  for (double v : values)
    if (v != values.front()) {
      all_equal = false;
      break;
    }
  if (all_equal) return values.front();
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

SplitEvaluation evaluate_mspe(const LinearModel& model, const Dataset& data, const SplitPlan& split) {
  if (data.task != Task::continuous)
    throw Error(ErrorCode::ConfigError, "MSPE requires a continuous task");
  const int n2 = static_cast<int>(split.test_indices.size());
  if (n2 < 2) throw Error(ErrorCode::InvalidSizes, "test set needs n2 >= 2");

  SplitEvaluation eval;
  eval.split = split;
  eval.kind = LossKind::mspe;
  eval.n2 = n2;
  eval.data_fingerprint = fingerprint(data);
  eval.model_converged = model.converged;
  eval.scores = predict_score(model, test_features(data, split));
  eval.losses.resize(n2);
  for (int i = 0; i < n2; ++i) {
    const double r = data.targets[split.test_indices[static_cast<std::size_t>(i)]] - eval.scores[i];
    eval.losses[i] = r * r;
  }
  eval.err_hat = eval.losses.mean();
  eval.var_hat = mspe_covariance(eval, eval);
  return eval;
}

double mspe_covariance(const SplitEvaluation& eval_k, const SplitEvaluation& eval_l) {
  check_comparable(eval_k, eval_l);
  if (eval_k.kind != LossKind::mspe) throw Error(ErrorCode::MismatchedData, "expected MSPE evaluations");
  double sum = 0.0;
  for_shared_test_indices(eval_k, eval_l, [&](std::size_t i, std::size_t j) {
    sum += (eval_k.losses[static_cast<Eigen::Index>(i)] - eval_k.err_hat) *
           (eval_l.losses[static_cast<Eigen::Index>(j)] - eval_l.err_hat);
  });
  const double n2 = static_cast<double>(eval_k.n2);
  return sum / (n2 * n2);
}

SplitEvaluation evaluate_cindex(const LinearModel& model, const Dataset& data, const SplitPlan& split) {
  if (data.task != Task::binary) throw Error(ErrorCode::ConfigError, "c-index requires a binary task");
  const int n2 = static_cast<int>(split.test_indices.size());
  if (n2 < 2) throw Error(ErrorCode::InvalidSizes, "test set needs n2 >= 2");

  SplitEvaluation eval;
  eval.split = split;
  eval.kind = LossKind::cindex;
  eval.n2 = n2;
  eval.data_fingerprint = fingerprint(data);
  eval.model_converged = model.converged;
  eval.scores = predict_score(model, test_features(data, split));
  eval.labels.resize(static_cast<std::size_t>(n2));

  std::vector<double> pos_scores, neg_scores;
  for (int i = 0; i < n2; ++i) {
    const bool positive = data.targets[split.test_indices[static_cast<std::size_t>(i)]] == 1.0;
    eval.labels[static_cast<std::size_t>(i)] = positive ? 1 : 0;
    (positive ? pos_scores : neg_scores).push_back(eval.scores[i]);
  }
  eval.m1 = static_cast<int>(pos_scores.size());
  eval.m0 = static_cast<int>(neg_scores.size());
  if (eval.m0 == 0 || eval.m1 == 0)
    throw Error(ErrorCode::DegenerateTestSet,
                "test set has m0=" + std::to_string(eval.m0) + " negatives and m1=" +
                    std::to_string(eval.m1) + " positives; both classes required");
  std::sort(pos_scores.begin(), pos_scores.end());
  std::sort(neg_scores.begin(), neg_scores.end());

  // Sweep means: a negative's placement is the fraction of positives it is
  // strictly below; a positive's the fraction of negatives strictly below it.
  // Counting in integers keeps the pair total exact.
  eval.placements.resize(n2);
  long long pair_total = 0;
  for (int i = 0; i < n2; ++i) {
    const double s = eval.scores[i];
    if (eval.labels[static_cast<std::size_t>(i)]) {
      const auto below = std::lower_bound(neg_scores.begin(), neg_scores.end(), s) - neg_scores.begin();
      eval.placements[i] = static_cast<double>(below) / static_cast<double>(eval.m0);
    } else {
      const auto above = pos_scores.end() - std::upper_bound(pos_scores.begin(), pos_scores.end(), s);
      eval.placements[i] = static_cast<double>(above) / static_cast<double>(eval.m1);
      pair_total += above;
    }
  }
  eval.err_hat = static_cast<double>(pair_total) /
                 (static_cast<double>(eval.m0) * static_cast<double>(eval.m1));
  eval.var_hat = cindex_covariance(eval, eval);
  return eval;
}

double cindex_covariance(const SplitEvaluation& eval_k, const SplitEvaluation& eval_l) {
  check_comparable(eval_k, eval_l);
  if (eval_k.kind != LossKind::cindex) throw Error(ErrorCode::MismatchedData, "expected c-index evaluations");
  if (eval_k.m0 == 0 || eval_k.m1 == 0 || eval_l.m0 == 0 || eval_l.m1 == 0)
    throw Error(ErrorCode::DegenerateTestSet, "c-index covariance needs both classes in both test sets");

  double neg_sum = 0.0, pos_sum = 0.0;
  for_shared_test_indices(eval_k, eval_l, [&](std::size_t i, std::size_t j) {
    const double dk = eval_k.placements[static_cast<Eigen::Index>(i)] - eval_k.err_hat;
    const double dl = eval_l.placements[static_cast<Eigen::Index>(j)] - eval_l.err_hat;
    if (eval_k.labels[i]) {
      pos_sum += dk * dl;
    } else {
      neg_sum += dk * dl;
    }
  });
  return neg_sum / (static_cast<double>(eval_k.m0) * static_cast<double>(eval_l.m0)) +
         pos_sum / (static_cast<double>(eval_k.m1) * static_cast<double>(eval_l.m1));
}

EstimateEnsemble build_sigma(const std::vector<SplitEvaluation>& evals) {
  if (evals.empty()) throw Error(ErrorCode::InvalidSizes, "need at least one evaluation");
  const auto dim = static_cast<Eigen::Index>(evals.size());
  EstimateEnsemble ens;
  ens.loss_kind = evals.front().kind;
  ens.estimates.resize(dim);
  ens.sigma.resize(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto& ek = evals[static_cast<std::size_t>(k)];
    if (ek.kind != ens.loss_kind) throw Error(ErrorCode::MismatchedData, "mixed loss kinds in ensemble");
    ens.estimates[k] = ek.err_hat;
    ens.sigma(k, k) = ek.var_hat;
    for (Eigen::Index l = 0; l < k; ++l) {
      const auto& el = evals[static_cast<std::size_t>(l)];
      const double cov = ens.loss_kind == LossKind::mspe ? mspe_covariance(ek, el) : cindex_covariance(ek, el);
      ens.sigma(k, l) = cov;
      ens.sigma(l, k) = cov;
    }
  }
  return ens;
}

EstimateEnsemble compound_symmetrize(const EstimateEnsemble& ensemble) {
  const Eigen::Index dim = ensemble.size();
  if (dim < 2) throw Error(ErrorCode::TooFewSplits, "compound symmetry needs K+1 >= 2");
  std::vector<double> diag, offdiag;
  diag.reserve(static_cast<std::size_t>(dim));
  offdiag.reserve(static_cast<std::size_t>(dim * (dim - 1) / 2));
  for (Eigen::Index i = 0; i < dim; ++i) {
    diag.push_back(ensemble.sigma(i, i));
    for (Eigen::Index j = i + 1; j < dim; ++j) offdiag.push_back(ensemble.sigma(i, j));
  }
  const double d = mean_or_common(diag);
  const double c = mean_or_common(offdiag);
  EstimateEnsemble out;
  out.estimates = ensemble.estimates;
  out.loss_kind = ensemble.loss_kind;
  out.sigma = Eigen::MatrixXd::Constant(dim, dim, c);
  out.sigma.diagonal().setConstant(d);
  return out;
}

}  // namespace cvshrink
