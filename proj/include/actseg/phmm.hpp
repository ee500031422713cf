#pragma once

#include <cstdint>
#include <vector>

#include "actseg/chain.hpp"
#include "actseg/dataset.hpp"
#include "actseg/types.hpp"

namespace actseg::phmm {

// Discretizes (X, Y) into a grid cell and windowed velocity into per-axis
// sign bins; a symbol is one (cell, x-bin, y-bin) combination.
struct DiscretizerConfig {
  double room_width = 4.0;
  double room_height = 6.0;
  int grid_x = 4;
  int grid_y = 6;
  std::vector<double> velocity_thresholds{-0.1, 0.1};
  int velocity_window = 4;

  int velocity_bins() const {
    return static_cast<int>(velocity_thresholds.size()) + 1;
  }
  int symbol_count() const {
    return grid_x * grid_y * velocity_bins() * velocity_bins();
  }
};

struct PhmmParams {
  std::vector<double> initial;
  std::vector<std::vector<double>> transition;
  std::vector<std::vector<double>> emission;

  int num_labels() const { return static_cast<int>(initial.size()); }
  int num_symbols() const {
    return emission.empty() ? 0 : static_cast<int>(emission.front().size());
  }
};

struct PhmmModel {
  LabelAlphabet alphabet;
  DiscretizerConfig discretizer;
  PhmmParams params;
};

struct PhmmConfig {
  DiscretizerConfig discretizer;
  double smoothing = 0.1;
  double tolerance = 1e-5;
  int max_iterations = 100;
  int n_restarts = 5;
  double restart_jitter = 0.5;
  std::uint64_t seed = 0;
};

struct EmResult {
  PhmmParams params;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

std::vector<int> discretize(const ObservationSequence& x,
                            const DiscretizerConfig& config);

// Relative frequencies of the visible labels, with additive smoothing.
PhmmParams count_init(const Dataset& data, const PhmmConfig& config);

// Constrained Baum-Welch from an explicit start. The trace holds the joint
// incomplete log-likelihood sum over sequences, one entry per kept iterate.
EmResult em_train(const Dataset& data, const PhmmParams& init,
                  const PhmmConfig& config);

// Count-based start plus jittered restarts; each start is trained and the
// highest final likelihood wins.
PhmmParams init_params(const Dataset& data, const PhmmConfig& config);

PhmmModel train(const Dataset& data, const PhmmConfig& config);

chain::PotentialTable build_potentials(const PhmmModel& model,
                                       const ObservationSequence& x);

// log p(v, x): visible labels clamped, hidden ones summed out.
double joint_loglik(const PhmmModel& model, const LabeledSequence& seq);

std::vector<int> segment(const PhmmModel& model, const ObservationSequence& x);
std::vector<int> segment(const PhmmModel& model, const ObservationSequence& x,
                         const chain::Constraint& constraint);

}  // namespace actseg::phmm
