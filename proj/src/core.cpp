#include "cvshrink/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace cvshrink {

void validate(const Dataset& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  if (n < 2) throw Error(ErrorCode::InvalidSizes, "dataset needs at least 2 rows, got " + std::to_string(n));
  if (data.targets.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "targets length " + std::to_string(data.targets.size()) +
                                                  " does not match " + std::to_string(n) + " rows");
  if (!data.feature_names.empty() && static_cast<Eigen::Index>(data.feature_names.size()) != p)
    throw Error(ErrorCode::DimensionMismatch, "feature_names length does not match p");
  if (!data.features.allFinite() || !data.targets.allFinite())
    throw Error(ErrorCode::DegenerateInput, "dataset contains non-finite entries");
  if (data.task == Task::binary) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = data.targets[i];
      if (y != 0.0 && y != 1.0)
        throw Error(ErrorCode::NonBinaryTarget,
                    "row " + std::to_string(i) + " target " + std::to_string(y) + " not in {0,1}");
    }
  }
}

std::uint64_t fingerprint(const Dataset& data) {
  // FNV-1a over dimensions, task and target bytes; cheap and sufficient to
  // catch evaluations accidentally taken on different datasets.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* bytes, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t n = static_cast<std::uint64_t>(data.n());
  const std::uint64_t p = static_cast<std::uint64_t>(data.p());
  const std::uint64_t task = data.task == Task::binary ? 1 : 0;
  mix(&n, sizeof n);
  mix(&p, sizeof p);
  mix(&task, sizeof task);
  mix(data.targets.data(), sizeof(double) * static_cast<std::size_t>(data.targets.size()));
  // First feature column keeps the hash sensitive to covariates without
  // walking the full matrix.
  if (p > 0) {
    Eigen::VectorXd col0 = data.features.col(0);
    mix(col0.data(), sizeof(double) * static_cast<std::size_t>(col0.size()));
  }
  return h;
}

Dataset subset_rows(const Dataset& data, const std::vector<int>& rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidSizes, "empty row subset");
  Dataset out;
  out.task = data.task;
  out.feature_names = data.feature_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.p());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= data.n())
      throw Error(ErrorCode::DimensionMismatch, "row index " + std::to_string(r) + " out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(r);
    out.targets[static_cast<Eigen::Index>(i)] = data.targets[r];
  }
  return out;
}

SplitPlan make_split(int n, int n1, Rng& rng) {
  if (n1 < 1 || n - n1 < 2)
    throw Error(ErrorCode::InvalidSizes,
                "need 1 <= n1 <= n-2, got n1=" + std::to_string(n1) + " n=" + std::to_string(n));
  // Partial Fisher-Yates: the first n1 slots become the training set.
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = 0; i < n1; ++i) {
    const auto j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  SplitPlan plan;
  plan.train_indices.assign(perm.begin(), perm.begin() + n1);
  plan.test_indices.assign(perm.begin() + n1, perm.end());
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

std::vector<SplitPlan> make_split_family(int n, int n1, int K, Rng& rng) {
  if (K < 0) throw Error(ErrorCode::InvalidSizes, "K must be >= 0, got " + std::to_string(K));
  std::vector<SplitPlan> family;
  family.reserve(static_cast<std::size_t>(K) + 1);
  for (int k = 0; k <= K; ++k) {
    SplitPlan plan = make_split(n, n1, rng);
    plan.split_id = k;
    family.push_back(std::move(plan));
  }
  return family;
}

}  // namespace cvshrink
