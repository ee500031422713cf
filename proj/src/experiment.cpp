#include "actseg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "actseg/dataset.hpp"
#include "actseg/rng.hpp"

namespace actseg::experiment {

namespace {

// Child-seed streams; keeping them distinct lets any cell be re-run alone.
constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kTestStream = 2;
constexpr std::uint64_t kMaskStream = 3;
constexpr std::uint64_t kPhmmStream = 4;

struct Cell {
  int scenario_index = 0;
  int model_index = 0;
  int rho_index = 0;
  int repetition = 0;
};

struct CellOutcome {
  metrics::MetricsReport report;
  bool failed = false;
  std::string message;
};

struct Split {
  Dataset train;
  Dataset test;
};

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) continue;
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::vector<std::vector<int>> true_labels(const Dataset& data) {
  std::vector<std::vector<int>> out;
  out.reserve(data.sequences.size());
  for (const LabeledSequence& seq : data.sequences) {
    std::vector<int> labels(seq.length());
    for (int t = 0; t < seq.length(); ++t) labels[t] = seq.labels[t].label();
    out.push_back(std::move(labels));
  }
  return out;
}

CellOutcome run_cell(const ExperimentConfig& config, const Cell& cell,
                     const Split& split) {
  const std::string& scenario = config.scenarios[cell.scenario_index];
  const std::string& model_name = config.models[cell.model_index];
  const int rho_pct = config.rho_percent[cell.rho_index];
  const std::uint64_t si = static_cast<std::uint64_t>(cell.scenario_index);
  const std::uint64_t r = static_cast<std::uint64_t>(cell.repetition);
  const std::uint64_t pi = static_cast<std::uint64_t>(cell.rho_index);

  CellOutcome out;
  try {
    MaskSpec mask;
    mask.rho = rho_pct / 100.0;
    mask.seed = mix_seed(config.master_seed, {kMaskStream, si, r, pi});
    const Dataset masked = mask_labels(split.train, mask);

    std::vector<std::vector<int>> predicted;
    predicted.reserve(split.test.sequences.size());
    if (model_name == "crf") {
      const crf::TrainOutcome trained = crf::train(masked, config.crf_config);
      for (const LabeledSequence& seq : split.test.sequences)
        predicted.push_back(crf::segment(trained.model, seq.obs));
    } else if (model_name == "memm") {
      const memm::TrainOutcome trained =
          memm::train(masked, config.memm_config);
      for (const LabeledSequence& seq : split.test.sequences)
        predicted.push_back(memm::segment(trained.model, seq.obs));
    } else if (model_name == "phmm") {
      phmm::PhmmConfig pcfg = config.phmm_config;
      pcfg.seed = mix_seed(config.master_seed, {kPhmmStream, si, r, pi});
      const phmm::PhmmModel model = phmm::train(masked, pcfg);
      for (const LabeledSequence& seq : split.test.sequences)
        predicted.push_back(phmm::segment(model, seq.obs));
    } else {
      throw ConfigError("unknown model family: " + model_name);
    }

    metrics::ReportMeta meta;
    meta.model = model_name;
    meta.scenario = scenario;
    meta.rho = rho_pct / 100.0;
    meta.repetition = cell.repetition;
    meta.seed = mask.seed;
    out.report = metrics::score(true_labels(split.test), predicted,
                                split.test.alphabet.size(), std::move(meta));
  } catch (const std::exception& e) {
    out.failed = true;
    out.message = e.what();
  }
  return out;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  scenarios = builtin_scenarios();
  models = {"crf", "memm", "phmm"};
  for (int pct = 0; pct <= 90; pct += 10) rho_percent.push_back(pct);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
      continue;
    }
    const auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    try {
      if (key == "scenarios") {
        config.scenarios = split_list(value);
      } else if (key == "models") {
        config.models = split_list(value);
      } else if (key == "rho_grid") {
        config.rho_percent.clear();
        for (const std::string& item : split_list(value))
          config.rho_percent.push_back(std::stoi(item));
      } else if (key == "repetitions") {
        config.repetitions = std::stoi(value);
      } else if (key == "n_train") {
        config.n_train = std::stoi(value);
      } else if (key == "n_test") {
        config.n_test = std::stoi(value);
      } else if (key == "seed") {
        config.master_seed = std::stoull(value);
      } else if (key == "jobs") {
        config.jobs = std::stoi(value);
      } else if (key == "crf_sigma") {
        config.crf_config.sigma = std::stod(value);
      } else if (key == "memm_sigma") {
        config.memm_config.sigma = std::stod(value);
      } else if (key == "phmm_smoothing") {
        config.phmm_config.smoothing = std::stod(value);
      } else if (key == "phmm_restarts") {
        config.phmm_config.n_restarts = std::stoi(value);
      } else {
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw DataError(path + ":" + std::to_string(lineno) + ": bad value for '" +
                      key + "'");
    }
  }
  for (int pct : config.rho_percent)
    if (pct < 0 || pct >= 100)
      throw DataError(path + ": rho_grid entries must be in [0, 100)");
  if (config.repetitions < 1)
    throw DataError(path + ": repetitions must be >= 1");
  return config;
}

ExperimentResult run(const ExperimentConfig& config) {
  if (config.scenarios.empty() || config.models.empty() ||
      config.rho_percent.empty())
    throw ConfigError("experiment grid is empty");
  if (config.repetitions < 1 || config.n_train < 1 || config.n_test < 1)
    throw ConfigError("repetitions and split sizes must be >= 1");

  // Train/test splits are shared across models and rho values of a
  // (scenario, repetition) pair, so differences are down to the masking.
  const int n_scenarios = static_cast<int>(config.scenarios.size());
  std::vector<Split> splits(
      static_cast<std::size_t>(n_scenarios) * config.repetitions);
  for (int si = 0; si < n_scenarios; ++si) {
    SynthConfig synth = default_synth_config(config.scenarios[si]);
    for (int r = 0; r < config.repetitions; ++r) {
      const std::uint64_t s = static_cast<std::uint64_t>(si);
      const std::uint64_t rr = static_cast<std::uint64_t>(r);
      Split& split = splits[si * config.repetitions + r];
      synth.seed = mix_seed(config.master_seed, {kTrainStream, s, rr});
      split.train = synthesize(synth, config.n_train);
      synth.seed = mix_seed(config.master_seed, {kTestStream, s, rr});
      split.test = synthesize(synth, config.n_test);
    }
  }

  std::vector<Cell> cells;
  for (int si = 0; si < n_scenarios; ++si)
    for (int mi = 0; mi < static_cast<int>(config.models.size()); ++mi)
      for (int pi = 0; pi < static_cast<int>(config.rho_percent.size()); ++pi)
        for (int r = 0; r < config.repetitions; ++r)
          cells.push_back({si, mi, pi, r});

  std::vector<CellOutcome> outcomes(cells.size());
  const int jobs = std::max(
      1, config.jobs > 0
             ? config.jobs
             : static_cast<int>(std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      const Split& split =
          splits[cell.scenario_index * config.repetitions + cell.repetition];
      outcomes[i] = run_cell(config, cell, split);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  ExperimentResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (outcomes[i].failed) {
      const Cell& cell = cells[i];
      result.failures.push_back({config.scenarios[cell.scenario_index],
                                 config.models[cell.model_index],
                                 config.rho_percent[cell.rho_index],
                                 cell.repetition, outcomes[i].message});
    } else {
      result.reports.push_back(std::move(outcomes[i].report));
    }
  }
  result.aggregate = metrics::aggregate(result.reports);
  return result;
}

void write_outputs(const ExperimentResult& result,
                   const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto open = [&](const std::string& name) {
    std::ofstream out(out_dir + "/" + name);
    if (!out) throw DataError("cannot write " + out_dir + "/" + name);
    return out;
  };
  {
    std::ofstream out = open("reports.csv");
    metrics::write_report_csv(out, result.reports);
  }
  {
    std::ofstream out = open("aggregate.csv");
    metrics::write_aggregate_csv(out, result.aggregate);
  }
  {
    std::ofstream out = open("fscore_by_rho.csv");
    metrics::write_fscore_by_rho(out, result.aggregate);
  }
  if (!result.failures.empty()) {
    std::ofstream out = open("failures.txt");
    for (const CellFailure& f : result.failures)
      out << f.scenario << "," << f.model << "," << f.rho_percent << ","
          << f.repetition << ": " << f.message << "\n";
  }
}

}  // namespace actseg::experiment
