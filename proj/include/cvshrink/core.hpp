#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cvshrink/errors.hpp"
#include "cvshrink/rng.hpp"

namespace cvshrink {

enum class Task { continuous, binary };

inline const char* to_string(Task task) {
  return task == Task::continuous ? "continuous" : "binary";
}

/// Feature matrix plus outcome vector. Immutable after construction by
/// convention; every pipeline treats it as read-only shared state.
struct Dataset {
  Eigen::MatrixXd features;                // n x p
  Eigen::VectorXd targets;                 // length n; {0,1} for binary tasks
  Task task = Task::continuous;
  std::vector<std::string> feature_names;  // optional, empty or length p

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index p() const { return features.cols(); }
};

/// Checks the Dataset invariants (n >= 2, finite entries, binary targets in
/// {0,1}, consistent dimensions). Called by generators and ingestion.
void validate(const Dataset& data);

/// Content fingerprint used to detect evaluations taken on different data.
std::uint64_t fingerprint(const Dataset& data);

/// Row subset as a standalone Dataset (used for training sets, so the n >= 2
/// invariant is not re-imposed here; make_split guarantees n1 >= 1).
Dataset subset_rows(const Dataset& data, const std::vector<int>& rows);

/// Index partition of {0..n-1} for one train/test split.
struct SplitPlan {
  int split_id = 0;
  std::vector<int> train_indices;  // ascending, size n1
  std::vector<int> test_indices;   // ascending, size n2 = n - n1
};

/// Uniformly random n1-subset as training set, complement as test set,
/// both ascending. Requires 1 <= n1 <= n-2.
SplitPlan make_split(int n, int n1, Rng& rng);

/// K+1 independent uniform splits with ids 0..K; split 0 is the designated
/// split whose model is the estimand. Splits may coincide by chance.
std::vector<SplitPlan> make_split_family(int n, int n1, int K, Rng& rng);

}  // namespace cvshrink
