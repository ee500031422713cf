#pragma once

#include <utility>
#include <vector>

#include "actseg/chain.hpp"
#include "actseg/dataset.hpp"
#include "actseg/features.hpp"
#include "actseg/optimize.hpp"
#include "actseg/types.hpp"

namespace actseg::memm {

// Locally normalized chain model with one weight vector shared across
// source states. Feature layout is identical to the CRF's.
struct MemmModel {
  LabelAlphabet alphabet;
  FeatureConfig features;
  double sigma = 20.0;
  std::vector<double> weights;

  FeatureIndex index() const {
    return FeatureIndex(alphabet.size(), features.context_left,
                        features.context_right);
  }
};

struct EmConfig {
  double sigma = 20.0;
  double outer_tolerance = 1e-5;
  int max_outer_iterations = 100;
  optim::OptimConfig inner;

  EmConfig() {
    inner.tolerance = 1e-6;
    inner.max_iterations = 50;
  }
};

struct EmStepResult {
  MemmModel model;
  double penalized_loglik = 0.0;
};

struct TrainOutcome {
  MemmModel model;
  double objective = 0.0;
  int outer_iterations = 0;
  std::vector<double> trace;
  bool converged = false;
  bool halted_early = false;
};

// p(y_t | context window at t, y_prev). Pass kStartLabel for y_prev at t=0.
std::vector<double> local_distribution(const MemmModel& model,
                                       const ObservationSequence& x, int t,
                                       int y_prev);

// Table whose entries are local log-probabilities; its unconstrained chain
// partition is log 1 = 0.
chain::PotentialTable local_log_prob_table(const MemmModel& model,
                                           const ObservationSequence& x);

double sequence_incomplete_loglik(const MemmModel& model,
                                  const LabeledSequence& seq);

double penalized_incomplete_loglik(const MemmModel& model, const Dataset& data,
                                   double sigma);

EmStepResult em_step(const MemmModel& model, const Dataset& data,
                     const EmConfig& config);

TrainOutcome train(const Dataset& data, const EmConfig& config);

std::vector<int> segment(const MemmModel& model, const ObservationSequence& x);
std::vector<int> segment(const MemmModel& model, const ObservationSequence& x,
                         const chain::Constraint& constraint);

}  // namespace actseg::memm
