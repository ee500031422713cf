#pragma once

#include <functional>
#include <string>
#include <vector>

namespace actseg::optim {

/// Evaluation contract: given x, return the objective value and fill grad
/// (same dimension). Must be deterministic per call.
using Objective =
    std::function<double(const std::vector<double>& x, std::vector<double>& grad)>;

enum class Status {
  Converged,          // relative objective change below tolerance
  GradientConverged,  // gradient norm below gradient_tolerance
  MaxIterations,
  LineSearchFailed,   // returned the best iterate found so far
};

std::string to_string(Status s);

struct OptimConfig {
  int memory = 7;                    // L-BFGS history pairs
  int max_iterations = 500;
  double tolerance = 1e-5;           // relative objective change stop
  double gradient_tolerance = 1e-10; // Euclidean gradient norm stop
  double sufficient_increase = 1e-4; // Wolfe c1
  double curvature = 0.9;            // Wolfe c2, c1 < c2 < 1
  int max_line_search = 40;          // trials per step
};

struct Result {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;  // accepted steps
  Status status = Status::Converged;
};

/// Limited-memory quasi-Newton ascent with strong Wolfe line search. The
/// objective never decreases across accepted steps.
Result lbfgs_maximize(const Objective& obj, std::vector<double> x0,
                      const OptimConfig& config);

/// Nonlinear conjugate gradient ascent, Polak-Ribiere variant. A negative
/// beta resets the direction to steepest ascent.
Result cg_polak_ribiere_maximize(const Objective& obj, std::vector<double> x0,
                                 const OptimConfig& config);

/// Max relative componentwise error between the analytic gradient and
/// central finite differences at step h. The relative error denominator is
/// max(|analytic|, |numeric|, 1e-8).
double grad_check(const Objective& obj, const std::vector<double>& x,
                  double step);

}  // namespace actseg::optim
