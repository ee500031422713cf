#pragma once

#include <vector>

#include "actseg/chain.hpp"
#include "actseg/features.hpp"
#include "actseg/optimize.hpp"
#include "actseg/types.hpp"

namespace actseg::crf {

/// Partially hidden linear-chain CRF: weights over the shared feature space,
/// plus everything needed to reproduce extraction at test time.
struct CrfModel {
  LabelAlphabet alphabet;
  FeatureConfig features;
  double sigma = 5.0;
  std::vector<double> weights;  // K, in FeatureIndex order

  FeatureIndex index() const {
    return FeatureIndex(alphabet.size(), features.context_left,
                        features.context_right);
  }
};

struct TrainConfig {
  double sigma = 5.0;
  double tolerance = 1e-5;  // relative change of the penalized objective
  int max_iterations = 300;
  enum class Optimizer { Lbfgs, Cg };
  Optimizer optimizer = Optimizer::Lbfgs;
  int lbfgs_memory = 7;
};

struct TrainOutcome {
  CrfModel model;
  double objective = 0.0;
  int iterations = 0;
  optim::Status status = optim::Status::Converged;
};

/// Log-potential table of one sequence: entry (t, prev, curr) is the dot
/// product of the weights with the active features, linear in the weights.
chain::PotentialTable build_potentials(const CrfModel& model,
                                       const ObservationSequence& x);

/// log p(v|x) of one sequence: clamped minus unconstrained log-partition.
double sequence_incomplete_loglik(const CrfModel& model,
                                  const LabeledSequence& seq);

/// Sum of per-sequence incomplete log-likelihoods minus ||w||^2 / (2 sigma^2).
double penalized_incomplete_loglik(const CrfModel& model, const Dataset& data,
                                   double sigma);

/// Gradient of the penalized objective: clamped minus unconstrained marginal
/// feature expectations, minus w / sigma^2.
std::vector<double> gradient(const CrfModel& model, const Dataset& data,
                             double sigma);

/// Maximizes the penalized incomplete log-likelihood from all-zero weights.
/// Throws NumericalError when the dataset has no visible label at all.
TrainOutcome train(const Dataset& data, const TrainConfig& config);

std::vector<int> segment(const CrfModel& model, const ObservationSequence& x);
std::vector<int> segment(const CrfModel& model, const ObservationSequence& x,
                         const chain::Constraint& constraint);

}  // namespace actseg::crf
