#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actseg/crf.hpp"
#include "actseg/memm.hpp"
#include "actseg/metrics.hpp"
#include "actseg/phmm.hpp"

namespace actseg::experiment {

// The rho sweep: for every (scenario, model, rho, repetition) cell, mask the
// training split, train, segment the test split, score per token.
struct ExperimentConfig {
  std::vector<std::string> scenarios;
  std::vector<std::string> models;
  std::vector<int> rho_percent;
  int repetitions = 10;
  int n_train = 15;
  int n_test = 11;
  std::uint64_t master_seed = 42;
  int jobs = 1;
  crf::TrainConfig crf_config;
  memm::EmConfig memm_config;
  phmm::PhmmConfig phmm_config;

  ExperimentConfig();
};

// Key-value file, one `key = value` per line, `#` comments. Lists are
// comma-separated. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);

struct CellFailure {
  std::string scenario;
  std::string model;
  int rho_percent = 0;
  int repetition = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<metrics::MetricsReport> reports;
  std::vector<metrics::AggregateRow> aggregate;
  std::vector<CellFailure> failures;
};

ExperimentResult run(const ExperimentConfig& config);

// reports.csv, aggregate.csv, fscore_by_rho.csv, and failures.txt when any
// cell failed. Byte-identical for identical config.
void write_outputs(const ExperimentResult& result, const std::string& out_dir);

}  // namespace actseg::experiment
