#include "actseg/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace actseg::optim {

std::string to_string(Status s) {
  switch (s) {
    case Status::Converged: return "converged";
    case Status::GradientConverged: return "gradient-converged";
    case Status::MaxIterations: return "max-iterations";
    case Status::LineSearchFailed: return "line-search-failed";
  }
  return "unknown";
}

namespace {

// The public interface maximizes; internally everything below minimizes
// F = -f so the textbook Wolfe and update formulas apply verbatim.

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Probe {
  double phi;   // F(x + alpha d)
  double dphi;  // grad F(x + alpha d) . d
};

class LineSearchFn {
 public:
  LineSearchFn(const Objective& obj, const std::vector<double>& x,
               const std::vector<double>& d)
      : obj_(obj), x_(x), d_(d), xt_(x.size()), gt_(x.size()) {}

  Probe at(double alpha) {
    for (std::size_t i = 0; i < x_.size(); ++i) xt_[i] = x_[i] + alpha * d_[i];
    const double f = obj_(xt_, gt_);
    double dg = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) dg += gt_[i] * d_[i];
    return {-f, -dg};
  }

  const std::vector<double>& point() const { return xt_; }
  // Gradient of F at the last probed point.
  std::vector<double> neg_gradient() const {
    std::vector<double> g(gt_.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = -gt_[i];
    return g;
  }

 private:
  const Objective& obj_;
  const std::vector<double>& x_;
  const std::vector<double>& d_;
  std::vector<double> xt_;
  std::vector<double> gt_;
};

// Stationary point of the quadratic through (lo, phi_lo) with slope dphi_lo
// and (hi, phi_hi). Falls back to bisection when the fit is degenerate or
// the step leaves the bracket interior.
double interpolate(double lo, double phi_lo, double dphi_lo, double hi,
                   double phi_hi) {
  const double d = hi - lo;
  const double c = (phi_hi - phi_lo - dphi_lo * d) / (d * d);
  if (c <= 0.0 || !std::isfinite(c)) return lo + 0.5 * d;
  const double alpha = lo - 0.5 * dphi_lo / c;
  const double a = std::min(lo, hi), b = std::max(lo, hi);
  const double margin = 0.1 * (b - a);
  if (!std::isfinite(alpha) || alpha < a + margin * 0.1 || alpha > b - margin * 0.1)
    return lo + 0.5 * d;
  return alpha;
}

struct SearchOutcome {
  bool ok = false;
  double alpha = 0.0;
  Probe probe{0.0, 0.0};
};

// Strong Wolfe line search for the minimization form (Nocedal-Wright
// bracketing + zoom). phi0/dphi0 are F and dF.d at alpha = 0; dphi0 < 0.
SearchOutcome wolfe_search(LineSearchFn& fn, double phi0, double dphi0,
                           double alpha_init, const OptimConfig& cfg) {
  const double c1 = cfg.sufficient_increase;
  const double c2 = cfg.curvature;
  SearchOutcome out;

  auto zoom = [&](double lo, Probe plo, double hi, Probe phi_hi) {
    for (int i = 0; i < cfg.max_line_search; ++i) {
      const double alpha = interpolate(lo, plo.phi, plo.dphi, hi, phi_hi.phi);
      Probe p = fn.at(alpha);
      if (p.phi > phi0 + c1 * alpha * dphi0 || p.phi >= plo.phi) {
        hi = alpha;
        phi_hi = p;
      } else {
        if (std::fabs(p.dphi) <= -c2 * dphi0) {
          out.ok = true;
          out.alpha = alpha;
          out.probe = p;
          return;
        }
        if (p.dphi * (hi - lo) >= 0.0) {
          hi = lo;
          phi_hi = plo;
        }
        lo = alpha;
        plo = p;
      }
      if (std::fabs(hi - lo) < 1e-16 * std::max(1.0, std::fabs(lo))) break;
    }
  };

  double alpha_prev = 0.0;
  Probe prev{phi0, dphi0};
  double alpha = alpha_init;
  for (int i = 0; i < cfg.max_line_search; ++i) {
    Probe p = fn.at(alpha);
    if (p.phi > phi0 + c1 * alpha * dphi0 || (i > 0 && p.phi >= prev.phi)) {
      zoom(alpha_prev, prev, alpha, p);
      return out;
    }
    if (std::fabs(p.dphi) <= -c2 * dphi0) {
      out.ok = true;
      out.alpha = alpha;
      out.probe = p;
      return out;
    }
    if (p.dphi >= 0.0) {
      zoom(alpha, p, alpha_prev, prev);
      return out;
    }
    alpha_prev = alpha;
    prev = p;
    alpha *= 2.0;
    if (!std::isfinite(alpha)) break;
  }
  return out;
}

bool relative_change_small(double f_new, double f_old, double tol) {
  return std::fabs(f_new - f_old) <=
         tol * std::max({1.0, std::fabs(f_new), std::fabs(f_old)});
}

Result finish(const std::vector<double>& x, double phi, int iters, Status st) {
  return Result{x, -phi, iters, st};
}

}  // namespace

Result lbfgs_maximize(const Objective& obj, std::vector<double> x0,
                      const OptimConfig& config) {
  const std::size_t n = x0.size();
  std::vector<double> g(n);
  double phi = -obj(x0, g);
  for (double& v : g) v = -v;  // gradient of F = -f

  struct Pair {
    std::vector<double> s, y;
    double rho;
  };
  std::deque<Pair> history;
  std::vector<double> d(n), q(n);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    if (norm2(g) <= config.gradient_tolerance)
      return finish(x0, phi, iter, Status::GradientConverged);

    // Two-loop recursion: d = -H g.
    q = g;
    std::vector<double> alpha_hist(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      const Pair& h = history[i];
      alpha_hist[i] = h.rho * dot(h.s, q);
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha_hist[i] * h.y[k];
    }
    double gamma = 1.0;
    if (!history.empty()) {
      const Pair& last = history.back();
      gamma = dot(last.s, last.y) / dot(last.y, last.y);
    }
    for (std::size_t k = 0; k < n; ++k) q[k] *= gamma;
    for (std::size_t i = 0; i < history.size(); ++i) {
      const Pair& h = history[i];
      const double beta = h.rho * dot(h.y, q);
      for (std::size_t k = 0; k < n; ++k)
        q[k] += (alpha_hist[i] - beta) * h.s[k];
    }
    for (std::size_t k = 0; k < n; ++k) d[k] = -q[k];

    double dphi0 = dot(g, d);
    if (dphi0 >= 0.0) {  // not a descent direction; fall back to -g
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
      dphi0 = dot(g, d);
      if (dphi0 >= 0.0)
        return finish(x0, phi, iter, Status::GradientConverged);
    }

    LineSearchFn fn(obj, x0, d);
    SearchOutcome ls = wolfe_search(fn, phi, dphi0, 1.0, config);
    if (!ls.ok || ls.probe.phi > phi)
      return finish(x0, phi, iter, Status::LineSearchFailed);

    std::vector<double> x_new = fn.point();
    std::vector<double> g_new = fn.neg_gradient();
    Pair pair;
    pair.s.resize(n);
    pair.y.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      pair.s[k] = x_new[k] - x0[k];
      pair.y[k] = g_new[k] - g[k];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-10 * norm2(pair.s) * norm2(pair.y)) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > config.memory)
        history.pop_front();
    }

    const double phi_new = ls.probe.phi;
    x0 = std::move(x_new);
    g = std::move(g_new);
    const bool done = relative_change_small(-phi_new, -phi, config.tolerance);
    phi = phi_new;
    if (done) return finish(x0, phi, iter + 1, Status::Converged);
  }
  return finish(x0, phi, config.max_iterations, Status::MaxIterations);
}

Result cg_polak_ribiere_maximize(const Objective& obj, std::vector<double> x0,
                                 const OptimConfig& config) {
  const std::size_t n = x0.size();
  std::vector<double> g(n);
  double phi = -obj(x0, g);
  for (double& v : g) v = -v;

  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
  double alpha_prev = 0.0;
  double dphi_prev = 0.0;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const double gnorm = norm2(g);
    if (gnorm <= config.gradient_tolerance)
      return finish(x0, phi, iter, Status::GradientConverged);

    double dphi0 = dot(g, d);
    if (dphi0 >= 0.0) {  // restart from steepest descent
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
      dphi0 = dot(g, d);
    }

    double alpha_init = 1.0 / (1.0 + gnorm);
    if (iter > 0 && dphi0 < 0.0 && dphi_prev < 0.0)
      alpha_init = std::min(1e8, alpha_prev * dphi_prev / dphi0);

    LineSearchFn fn(obj, x0, d);
    SearchOutcome ls = wolfe_search(fn, phi, dphi0, alpha_init, config);
    if (!ls.ok || ls.probe.phi > phi)
      return finish(x0, phi, iter, Status::LineSearchFailed);

    std::vector<double> g_new = fn.neg_gradient();
    // Polak-Ribiere with a steepest-descent reset when beta < 0.
    double num = 0.0;
    for (std::size_t k = 0; k < n; ++k) num += g_new[k] * (g_new[k] - g[k]);
    const double beta = std::max(0.0, num / (gnorm * gnorm));
    x0 = fn.point();
    for (std::size_t k = 0; k < n; ++k) d[k] = -g_new[k] + beta * d[k];
    g = std::move(g_new);
    alpha_prev = ls.alpha;
    dphi_prev = dphi0;

    const double phi_new = ls.probe.phi;
    const bool done = relative_change_small(-phi_new, -phi, config.tolerance);
    phi = phi_new;
    if (done) return finish(x0, phi, iter + 1, Status::Converged);
  }
  return finish(x0, phi, config.max_iterations, Status::MaxIterations);
}

double grad_check(const Objective& obj, const std::vector<double>& x,
                  double step) {
  std::vector<double> g(x.size());
  obj(x, g);
  std::vector<double> xt = x;
  std::vector<double> scratch(x.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    xt[k] = x[k] + step;
    const double fp = obj(xt, scratch);
    xt[k] = x[k] - step;
    const double fm = obj(xt, scratch);
    xt[k] = x[k];
    const double numeric = (fp - fm) / (2.0 * step);
    const double denom = std::max({std::fabs(g[k]), std::fabs(numeric), 1e-8});
    worst = std::max(worst, std::fabs(g[k] - numeric) / denom);
  }
  return worst;
}

}  // namespace actseg::optim
