#pragma once

#include <vector>

#include "actseg/logspace.hpp"
#include "actseg/types.hpp"

namespace actseg::chain {

/// Per-position log-potentials over (previous label, current label).
///
/// Position 0 carries a unary term only; the slice for t = 1..T-1 holds
/// log-potentials over (y_{t-1}, y_t), inclusive of any unary contribution
/// at t. Total path score of y_0..y_{T-1} is
///   unary(y_0) + sum_{t>=1} pair(t, y_{t-1}, y_t).
class PotentialTable {
 public:
  PotentialTable(int length, int num_labels, double fill = 0.0);

  int length() const { return length_; }
  int num_labels() const { return num_labels_; }

  double unary(int y) const { return unary_[y]; }
  double& unary(int y) { return unary_[y]; }

  // t in [1, length).
  double pair(int t, int prev, int curr) const {
    return pairwise_[offset(t, prev, curr)];
  }
  double& pair(int t, int prev, int curr) {
    return pairwise_[offset(t, prev, curr)];
  }

 private:
  std::size_t offset(int t, int prev, int curr) const {
    return (static_cast<std::size_t>(t - 1) * num_labels_ + prev) *
               num_labels_ +
           curr;
  }

  int length_;
  int num_labels_;
  std::vector<double> unary_;
  std::vector<double> pairwise_;
};

/// Per-position allowed label sets. Disallowed labels score kLogZero, so
/// clamped forward passes sum only over consistent paths.
class Constraint {
 public:
  /// All labels allowed at every position.
  static Constraint none(int length, int num_labels);

  /// Visible -> singleton, Hidden -> full alphabet, AllowedSet -> itself.
  static Constraint from_labels(const std::vector<PositionLabel>& labels,
                                int num_labels);

  int length() const { return length_; }
  int num_labels() const { return num_labels_; }

  bool allowed(int t, int y) const {
    return allowed_[static_cast<std::size_t>(t) * num_labels_ + y] != 0;
  }
  void disallow(int t, int y) {
    allowed_[static_cast<std::size_t>(t) * num_labels_ + y] = 0;
  }

  /// True when every label is allowed at every position.
  bool vacuous() const;

  /// Throws if some position has an empty allowed set.
  void check_nonempty() const;

 private:
  Constraint(int length, int num_labels, std::uint8_t fill);

  int length_;
  int num_labels_;
  std::vector<std::uint8_t> allowed_;
};

/// Exact marginals of the constrained chain distribution.
struct Posteriors {
  double log_z = 0.0;
  std::vector<double> unary;     // T x |Y| probabilities, row-major
  std::vector<double> pairwise;  // (T-1) x |Y| x |Y|, slice t covers (t-1, t)

  double unary_at(int t, int y, int num_labels) const {
    return unary[static_cast<std::size_t>(t) * num_labels + y];
  }
  double pair_at(int t, int prev, int curr, int num_labels) const {
    return pairwise[(static_cast<std::size_t>(t - 1) * num_labels + prev) *
                        num_labels +
                    curr];
  }
};

struct ViterbiResult {
  std::vector<int> path;
  double score = 0.0;
};

/// log of the summed exp(path score) over all constraint-consistent paths.
/// With a vacuous constraint this is log Z; with visible labels clamped it
/// is the numerator of the incomplete likelihood.
double log_partition(const PotentialTable& pot, const Constraint& c);

/// Forward-backward. Unary rows and pairwise slices each sum to one;
/// disallowed labels get probability exactly zero.
Posteriors posteriors(const PotentialTable& pot, const Constraint& c);

/// Max-scoring consistent path. Ties prefer the lowest label index at every
/// backtrack step, so the result is reproducible.
ViterbiResult viterbi(const PotentialTable& pot, const Constraint& c);

/// Total potential of a given path (same quantity viterbi maximizes).
double path_score(const PotentialTable& pot, const std::vector<int>& path);

}  // namespace actseg::chain
