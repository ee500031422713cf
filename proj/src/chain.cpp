#include "actseg/chain.hpp"

#include <cassert>
#include <cmath>

namespace actseg::chain {

PotentialTable::PotentialTable(int length, int num_labels, double fill)
    : length_(length),
      num_labels_(num_labels),
      unary_(static_cast<std::size_t>(num_labels), fill),
      pairwise_(static_cast<std::size_t>(length > 1 ? length - 1 : 0) *
                    num_labels * num_labels,
                fill) {
  assert(length >= 1 && num_labels >= 1);
}

Constraint::Constraint(int length, int num_labels, std::uint8_t fill)
    : length_(length),
      num_labels_(num_labels),
      allowed_(static_cast<std::size_t>(length) * num_labels, fill) {}

Constraint Constraint::none(int length, int num_labels) {
  return Constraint(length, num_labels, 1);
}

Constraint Constraint::from_labels(const std::vector<PositionLabel>& labels,
                                   int num_labels) {
  Constraint c(static_cast<int>(labels.size()), num_labels, 0);
  for (int t = 0; t < c.length(); ++t) {
    const PositionLabel& pl = labels[t];
    if (pl.is_hidden()) {
      for (int y = 0; y < num_labels; ++y)
        c.allowed_[static_cast<std::size_t>(t) * num_labels + y] = 1;
    } else if (pl.is_visible()) {
      if (pl.label() < 0 || pl.label() >= num_labels)
        throw DataError("visible label out of alphabet range");
      c.allowed_[static_cast<std::size_t>(t) * num_labels + pl.label()] = 1;
    } else {
      for (int y : pl.allowed()) {
        if (y < 0 || y >= num_labels)
          throw DataError("allowed-set label out of alphabet range");
        c.allowed_[static_cast<std::size_t>(t) * num_labels + y] = 1;
      }
    }
  }
  return c;
}

bool Constraint::vacuous() const {
  for (std::uint8_t a : allowed_)
    if (!a) return false;
  return true;
}

void Constraint::check_nonempty() const {
  for (int t = 0; t < length_; ++t) {
    bool any = false;
    for (int y = 0; y < num_labels_ && !any; ++y) any = allowed(t, y);
    if (!any)
      throw DataError("constraint has an empty allowed set at position " +
                      std::to_string(t));
  }
}

namespace {

// Forward recursion under the constraint mask. alpha is T x |Y| in log space.
void forward(const PotentialTable& pot, const Constraint& c,
             std::vector<double>& alpha) {
  const int T = pot.length();
  const int Y = pot.num_labels();
  alpha.assign(static_cast<std::size_t>(T) * Y, kLogZero);
  for (int y = 0; y < Y; ++y)
    if (c.allowed(0, y)) alpha[y] = pot.unary(y);
  std::vector<double> terms(Y);
  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < Y; ++y) {
      double* out = &alpha[static_cast<std::size_t>(t) * Y + y];
      if (!c.allowed(t, y)) continue;  // stays kLogZero
      for (int p = 0; p < Y; ++p)
        terms[p] = alpha[static_cast<std::size_t>(t - 1) * Y + p] +
                   pot.pair(t, p, y);
      *out = log_sum_exp(terms);
    }
  }
}

// Backward recursion; beta_{T-1} = 0. Disallowed labels are masked on the
// "next" end of each edge, which is all the forward pass has not covered.
void backward(const PotentialTable& pot, const Constraint& c,
              std::vector<double>& beta) {
  const int T = pot.length();
  const int Y = pot.num_labels();
  beta.assign(static_cast<std::size_t>(T) * Y, 0.0);
  std::vector<double> terms(Y);
  for (int t = T - 2; t >= 0; --t) {
    for (int y = 0; y < Y; ++y) {
      for (int n = 0; n < Y; ++n)
        terms[n] = c.allowed(t + 1, n)
                       ? pot.pair(t + 1, y, n) +
                             beta[static_cast<std::size_t>(t + 1) * Y + n]
                       : kLogZero;
      beta[static_cast<std::size_t>(t) * Y + y] = log_sum_exp(terms);
    }
  }
}

}  // namespace

double log_partition(const PotentialTable& pot, const Constraint& c) {
  assert(c.length() == pot.length() && c.num_labels() == pot.num_labels());
  c.check_nonempty();
  std::vector<double> alpha;
  forward(pot, c, alpha);
  const int T = pot.length();
  const int Y = pot.num_labels();
  return log_sum_exp(
      std::span<const double>(alpha).subspan(static_cast<std::size_t>(T - 1) * Y, Y));
}

Posteriors posteriors(const PotentialTable& pot, const Constraint& c) {
  assert(c.length() == pot.length() && c.num_labels() == pot.num_labels());
  c.check_nonempty();
  const int T = pot.length();
  const int Y = pot.num_labels();
  std::vector<double> alpha, beta;
  forward(pot, c, alpha);
  backward(pot, c, beta);

  Posteriors post;
  post.log_z = log_sum_exp(
      std::span<const double>(alpha).subspan(static_cast<std::size_t>(T - 1) * Y, Y));
  post.unary.assign(static_cast<std::size_t>(T) * Y, 0.0);
  post.pairwise.assign(static_cast<std::size_t>(T > 1 ? T - 1 : 0) * Y * Y,
                       0.0);
  for (int t = 0; t < T; ++t)
    for (int y = 0; y < Y; ++y) {
      const std::size_t i = static_cast<std::size_t>(t) * Y + y;
      const double lp = alpha[i] + beta[i] - post.log_z;
      post.unary[i] = lp == kLogZero ? 0.0 : std::exp(lp);
    }
  for (int t = 1; t < T; ++t)
    for (int p = 0; p < Y; ++p) {
      const double a = alpha[static_cast<std::size_t>(t - 1) * Y + p];
      if (a == kLogZero) continue;  // rows of a disallowed predecessor
      for (int y = 0; y < Y; ++y) {
        if (!c.allowed(t, y)) continue;
        const double lp = a + pot.pair(t, p, y) +
                          beta[static_cast<std::size_t>(t) * Y + y] -
                          post.log_z;
        post.pairwise[(static_cast<std::size_t>(t - 1) * Y + p) * Y + y] =
            lp == kLogZero ? 0.0 : std::exp(lp);
      }
    }
  return post;
}

ViterbiResult viterbi(const PotentialTable& pot, const Constraint& c) {
  assert(c.length() == pot.length() && c.num_labels() == pot.num_labels());
  c.check_nonempty();
  const int T = pot.length();
  const int Y = pot.num_labels();
  std::vector<double> delta(static_cast<std::size_t>(T) * Y, kLogZero);
  std::vector<int> back(static_cast<std::size_t>(T) * Y, -1);

  for (int y = 0; y < Y; ++y)
    if (c.allowed(0, y)) delta[y] = pot.unary(y);
  for (int t = 1; t < T; ++t)
    for (int y = 0; y < Y; ++y) {
      if (!c.allowed(t, y)) continue;
      double best = kLogZero;
      int best_prev = -1;
      // Strict > keeps the lowest-index predecessor on ties.
      for (int p = 0; p < Y; ++p) {
        const double s =
            delta[static_cast<std::size_t>(t - 1) * Y + p] + pot.pair(t, p, y);
        if (s > best || best_prev < 0) {
          best = s;
          best_prev = p;
        }
      }
      delta[static_cast<std::size_t>(t) * Y + y] = best;
      back[static_cast<std::size_t>(t) * Y + y] = best_prev;
    }

  ViterbiResult res;
  res.path.assign(T, -1);
  double best = kLogZero;
  int best_y = -1;
  for (int y = 0; y < Y; ++y) {
    const double s = delta[static_cast<std::size_t>(T - 1) * Y + y];
    if (c.allowed(T - 1, y) && (s > best || best_y < 0)) {
      best = s;
      best_y = y;
    }
  }
  res.score = best;
  res.path[T - 1] = best_y;
  for (int t = T - 1; t > 0; --t)
    res.path[t - 1] = back[static_cast<std::size_t>(t) * Y + res.path[t]];
  return res;
}

double path_score(const PotentialTable& pot, const std::vector<int>& path) {
  assert(static_cast<int>(path.size()) == pot.length());
  double s = pot.unary(path[0]);
  for (int t = 1; t < pot.length(); ++t)
    s += pot.pair(t, path[t - 1], path[t]);
  return s;
}

}  // namespace actseg::chain
