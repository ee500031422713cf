#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "actseg/types.hpp"

namespace actseg {

/// One primitive activity: a walk between two named landmarks.
struct ActivityDef {
  std::string from;
  std::string to;
};

/// Configuration of the synthetic trajectory generator. Sequences are noisy
/// piecewise-linear walks across the landmark pair of each activity in the
/// template, on a room of width x height meters.
struct SynthConfig {
  double room_width = 4.0;
  double room_height = 6.0;
  std::vector<std::pair<std::string, Point>> landmarks;
  std::vector<ActivityDef> activities;  // row i defines label i
  std::string scenario;
  std::vector<int> template_activities;  // label indices, walk order
  double step_noise = 0.08;              // meters, per-axis
  int min_steps_per_leg = 5;
  int max_steps_per_leg = 10;
  std::uint64_t seed = 0;
};

struct MaskSpec {
  double rho = 0.0;  // portion of labels hidden, in [0, 1]
  std::uint64_t seed = 0;
};

/// The twelve landmark-to-landmark activities; label i is activity row i.
LabelAlphabet default_alphabet();

/// Scenario names with built-in templates.
std::vector<std::string> builtin_scenarios();

/// Default room, landmarks, activity table, and the template of the named
/// scenario. The templates are synthetic compositions of the activity rows;
/// they chain head-to-tail so each scenario is one continuous walk.
SynthConfig default_synth_config(const std::string& scenario);

/// Generates n sequences with every position carrying its ground-truth
/// label. Deterministic given config.seed.
Dataset synthesize(const SynthConfig& config, int n_sequences);

/// Hides exactly round(T * rho) labels per sequence, chosen uniformly
/// without replacement under the seed. Input labels must all be visible.
Dataset mask_labels(const Dataset& data, const MaskSpec& spec);

/// Line-delimited records, one sequence per line:
///   {"obs": [[x,y],...], "labels": [int|null|[int,...],...],
///    "meta": {"scenario": str, "seed": int}}
/// null = hidden, list = allowed set.
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path, const LabelAlphabet& alphabet);

/// Ordered list of label names, one per line.
void save_alphabet(const LabelAlphabet& alphabet, const std::string& path);
LabelAlphabet load_alphabet(const std::string& path);

}  // namespace actseg
