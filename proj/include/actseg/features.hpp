#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "actseg/types.hpp"

namespace actseg {

/// Previous-label value used at the first position of a sequence, where no
/// transition feature is emitted.
inline constexpr int kStartLabel = -1;

/// Windowing and normalization knobs for observation features.
///
/// The observation vector at position t is (X, Y, u_X, u_Y, speed) where the
/// velocities average over a window of `velocity_window` positions, clamped
/// at the sequence ends. Context positions t-s1..t+s2 feed the
/// state-observation features.
struct FeatureConfig {
  int velocity_window = 4;  // even, positive
  int context_left = 2;     // s1
  int context_right = 2;    // s2

  // Per-dimension z-scoring statistics, filled by fit_normalization.
  std::array<double, 5> mean{0.0, 0.0, 0.0, 0.0, 0.0};
  std::array<double, 5> stddev{1.0, 1.0, 1.0, 1.0, 1.0};
  bool fitted = false;

  int context_size() const { return context_left + context_right + 1; }

  bool operator==(const FeatureConfig& other) const = default;
};

struct StateObsDescriptor {
  int label;       // current label l
  int component;   // m in 0..4: X, Y, u_X, u_Y, speed
  int offset;      // epsilon in -s1..s2
  bool operator==(const StateObsDescriptor&) const = default;
};

struct StateTransDescriptor {
  int prev_label;
  int curr_label;
  bool operator==(const StateTransDescriptor&) const = default;
};

using FeatureDescriptor = std::variant<StateObsDescriptor, StateTransDescriptor>;

/// Bijection between feature descriptors and dense weight indices 0..K-1.
/// K = 5 s |Y| + |Y|^2. The state-observation block comes first, grouped by
/// label, then by context offset, then by component; the transition block
/// follows in (prev, curr) row-major order.
class FeatureIndex {
 public:
  FeatureIndex(int num_labels, int context_left, int context_right);

  int size() const { return size_; }
  int num_labels() const { return num_labels_; }
  int context_size() const { return context_left_ + context_right_ + 1; }

  int state_obs(int label, int component, int offset) const;
  int state_trans(int prev_label, int curr_label) const;
  FeatureDescriptor describe(int index) const;

 private:
  int num_labels_;
  int context_left_;
  int context_right_;
  int trans_base_;  // 5 s |Y|
  int size_;
};

/// Sparse feature vector; indices strictly increasing.
struct FeatureVector {
  std::vector<std::uint32_t> index;
  std::vector<double> value;

  std::size_t size() const { return index.size(); }
  void push(std::uint32_t i, double v) {
    index.push_back(i);
    value.push_back(v);
  }
  double dot(const std::vector<double>& weights) const;
  /// accum[k] += coef * value_k for every active feature.
  void add_scaled(double coef, std::vector<double>& accum) const;
};

/// Raw observation vector g(x, t) = (X, Y, u_X, u_Y, speed). Velocity
/// indices clamp to the sequence ends; the difference is divided by the
/// actual index span when clamped. t is 0-based.
std::array<double, 5> raw_observation_features(const ObservationSequence& x,
                                               int t, int velocity_window);

/// Per-dimension mean and population stddev over every position of every
/// sequence. Zero-variance dimensions get stddev 1 so z-scoring stays
/// defined.
FeatureConfig fit_normalization(const Dataset& data, FeatureConfig config);

/// Normalized observation vector at a (clamped) context position.
std::array<double, 5> normalized_observation(const ObservationSequence& x,
                                             int t, const FeatureConfig& cfg);

/// Active features for (y_prev, y_curr) at position t: 5 s state-observation
/// entries for y_curr plus one unit transition entry when y_prev is not
/// kStartLabel. Indices come out strictly increasing.
FeatureVector emit_features(const ObservationSequence& x, int t, int y_prev,
                            int y_curr, const FeatureConfig& cfg,
                            const FeatureIndex& index);

/// Context observation values of a whole sequence, one row per position.
/// Slot order matches the per-label state-observation block of
/// FeatureIndex, so scoring a label is a contiguous dot product with its
/// weight block.
struct SequenceFeatureCache {
  int length = 0;
  int span = 0;  // 5 s
  std::vector<double> values;

  const double* row(int t) const {
    return values.data() + static_cast<std::size_t>(t) * span;
  }
};

SequenceFeatureCache cache_sequence_features(const ObservationSequence& x,
                                             const FeatureConfig& cfg);

}  // namespace actseg
