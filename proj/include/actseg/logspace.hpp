#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace actseg {

/// Additive identity of log-space accumulation; stands in for log(0) and for
/// disallowed lattice entries.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without overflow.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

/// log sum_i exp(v[i]); kLogZero on an empty or all-kLogZero input.
inline double log_sum_exp(std::span<const double> v) {
  double hi = kLogZero;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

}  // namespace actseg
