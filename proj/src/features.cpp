#include "actseg/features.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace actseg {

FeatureIndex::FeatureIndex(int num_labels, int context_left, int context_right)
    : num_labels_(num_labels),
      context_left_(context_left),
      context_right_(context_right) {
  if (num_labels < 1) throw ConfigError("alphabet must be non-empty");
  if (context_left < 0 || context_right < 0)
    throw ConfigError("context bounds must be non-negative");
  trans_base_ = 5 * context_size() * num_labels_;
  size_ = trans_base_ + num_labels_ * num_labels_;
}

int FeatureIndex::state_obs(int label, int component, int offset) const {
  assert(label >= 0 && label < num_labels_);
  assert(component >= 0 && component < 5);
  assert(offset >= -context_left_ && offset <= context_right_);
  const int slot = (offset + context_left_) * 5 + component;
  return label * 5 * context_size() + slot;
}

int FeatureIndex::state_trans(int prev_label, int curr_label) const {
  assert(prev_label >= 0 && prev_label < num_labels_);
  assert(curr_label >= 0 && curr_label < num_labels_);
  return trans_base_ + prev_label * num_labels_ + curr_label;
}

FeatureDescriptor FeatureIndex::describe(int index) const {
  if (index < 0 || index >= size_)
    throw std::out_of_range("feature index out of range");
  if (index < trans_base_) {
    const int per_label = 5 * context_size();
    const int label = index / per_label;
    const int slot = index % per_label;
    return StateObsDescriptor{label, slot % 5, slot / 5 - context_left_};
  }
  const int rest = index - trans_base_;
  return StateTransDescriptor{rest / num_labels_, rest % num_labels_};
}

double FeatureVector::dot(const std::vector<double>& weights) const {
  double s = 0.0;
  for (std::size_t i = 0; i < index.size(); ++i) s += weights[index[i]] * value[i];
  return s;
}

void FeatureVector::add_scaled(double coef, std::vector<double>& accum) const {
  for (std::size_t i = 0; i < index.size(); ++i) accum[index[i]] += coef * value[i];
}

std::array<double, 5> raw_observation_features(const ObservationSequence& x,
                                               int t, int velocity_window) {
  const int T = static_cast<int>(x.size());
  assert(t >= 0 && t < T);
  const int half = velocity_window / 2;
  const int lo = std::max(0, t - half);
  const int hi = std::min(T - 1, t + half);
  const int span = hi - lo;
  double ux = 0.0, uy = 0.0;
  if (span > 0) {
    ux = (x[hi].x - x[lo].x) / span;
    uy = (x[hi].y - x[lo].y) / span;
  }
  return {x[t].x, x[t].y, ux, uy, std::hypot(ux, uy)};
}

FeatureConfig fit_normalization(const Dataset& data, FeatureConfig config) {
  if (data.sequences.empty())
    throw DataError("cannot fit normalization on an empty dataset");
  std::array<double, 5> sum{}, sumsq{};
  std::size_t n = 0;
  for (const LabeledSequence& seq : data.sequences) {
    const int T = seq.length();
    for (int t = 0; t < T; ++t) {
      const auto g = raw_observation_features(seq.obs, t, config.velocity_window);
      for (int m = 0; m < 5; ++m) {
        sum[m] += g[m];
        sumsq[m] += g[m] * g[m];
      }
      ++n;
    }
  }
  for (int m = 0; m < 5; ++m) {
    config.mean[m] = sum[m] / static_cast<double>(n);
    const double var =
        sumsq[m] / static_cast<double>(n) - config.mean[m] * config.mean[m];
    const double sd = std::sqrt(std::max(var, 0.0));
    config.stddev[m] = sd < 1e-12 ? 1.0 : sd;
  }
  config.fitted = true;
  return config;
}

std::array<double, 5> normalized_observation(const ObservationSequence& x,
                                             int t, const FeatureConfig& cfg) {
  const int T = static_cast<int>(x.size());
  const int u = std::clamp(t, 0, T - 1);
  auto g = raw_observation_features(x, u, cfg.velocity_window);
  for (int m = 0; m < 5; ++m) g[m] = (g[m] - cfg.mean[m]) / cfg.stddev[m];
  return g;
}

FeatureVector emit_features(const ObservationSequence& x, int t, int y_prev,
                            int y_curr, const FeatureConfig& cfg,
                            const FeatureIndex& index) {
  const int Y = index.num_labels();
  if (y_curr < 0 || y_curr >= Y)
    throw std::invalid_argument("current label outside alphabet");
  if (y_prev != kStartLabel && (y_prev < 0 || y_prev >= Y))
    throw std::invalid_argument("previous label outside alphabet");

  FeatureVector f;
  f.index.reserve(5 * cfg.context_size() + 1);
  f.value.reserve(5 * cfg.context_size() + 1);
  for (int eps = -cfg.context_left; eps <= cfg.context_right; ++eps) {
    const auto g = normalized_observation(x, t + eps, cfg);
    for (int m = 0; m < 5; ++m)
      f.push(static_cast<std::uint32_t>(index.state_obs(y_curr, m, eps)), g[m]);
  }
  if (y_prev != kStartLabel)
    f.push(static_cast<std::uint32_t>(index.state_trans(y_prev, y_curr)), 1.0);
  return f;
}

SequenceFeatureCache cache_sequence_features(const ObservationSequence& x,
                                             const FeatureConfig& cfg) {
  SequenceFeatureCache cache;
  cache.length = static_cast<int>(x.size());
  cache.span = 5 * cfg.context_size();
  cache.values.resize(static_cast<std::size_t>(cache.length) * cache.span);
  for (int t = 0; t < cache.length; ++t) {
    double* row = cache.values.data() + static_cast<std::size_t>(t) * cache.span;
    for (int eps = -cfg.context_left; eps <= cfg.context_right; ++eps) {
      const auto g = normalized_observation(x, t + eps, cfg);
      const int base = (eps + cfg.context_left) * 5;
      for (int m = 0; m < 5; ++m) row[base + m] = g[m];
    }
  }
  return cache;
}

}  // namespace actseg
