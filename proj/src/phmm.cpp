#include "actseg/phmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "actseg/features.hpp"
#include "actseg/logspace.hpp"
#include "actseg/rng.hpp"

namespace actseg::phmm {

namespace {

int clamp_cell(double coord, double extent, int cells) {
  const int c = static_cast<int>(std::floor(coord / extent * cells));
  return std::clamp(c, 0, cells - 1);
}

int velocity_bin(double v, const std::vector<double>& thresholds) {
  int b = 0;
  for (double thr : thresholds) {
    if (v > thr)
      ++b;
    else
      break;
  }
  return b;
}

struct Counts {
  std::vector<double> initial;
  std::vector<std::vector<double>> transition;
  std::vector<std::vector<double>> emission;

  Counts(int num_labels, int num_symbols)
      : initial(num_labels, 0.0),
        transition(num_labels, std::vector<double>(num_labels, 0.0)),
        emission(num_labels, std::vector<double>(num_symbols, 0.0)) {}
};

std::vector<double> normalize_row(const std::vector<double>& counts,
                                  double smoothing) {
  std::vector<double> out(counts.size());
  double total = 0.0;
  for (double c : counts) total += c + smoothing;
  for (std::size_t i = 0; i < counts.size(); ++i)
    out[i] = (counts[i] + smoothing) / total;
  return out;
}

PhmmParams params_from_counts(const Counts& counts, double smoothing) {
  PhmmParams p;
  p.initial = normalize_row(counts.initial, smoothing);
  p.transition.reserve(counts.transition.size());
  for (const auto& row : counts.transition)
    p.transition.push_back(normalize_row(row, smoothing));
  p.emission.reserve(counts.emission.size());
  for (const auto& row : counts.emission)
    p.emission.push_back(normalize_row(row, smoothing));
  return p;
}

chain::PotentialTable potentials_from(const PhmmParams& p,
                                      const std::vector<int>& symbols) {
  const int Y = p.num_labels();
  const int T = static_cast<int>(symbols.size());
  chain::PotentialTable pot(T, Y);
  for (int y = 0; y < Y; ++y)
    pot.unary(y) = std::log(p.initial[y]) + std::log(p.emission[y][symbols[0]]);
  for (int t = 1; t < T; ++t)
    for (int i = 0; i < Y; ++i)
      for (int j = 0; j < Y; ++j)
        pot.pair(t, i, j) =
            std::log(p.transition[i][j]) + std::log(p.emission[j][symbols[t]]);
  return pot;
}

struct PreparedSequence {
  std::vector<int> symbols;
  chain::Constraint clamp;
};

std::vector<PreparedSequence> prepare(const Dataset& data,
                                      const DiscretizerConfig& dcfg) {
  const int Y = data.alphabet.size();
  std::vector<PreparedSequence> out;
  out.reserve(data.sequences.size());
  for (const LabeledSequence& seq : data.sequences) {
    validate_sequence(seq, Y);
    out.push_back({discretize(seq.obs, dcfg),
                   chain::Constraint::from_labels(seq.labels, Y)});
  }
  return out;
}

}  // namespace

std::vector<int> discretize(const ObservationSequence& x,
                            const DiscretizerConfig& config) {
  std::vector<int> out(x.size());
  const int cells = config.grid_x * config.grid_y;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::array<double, 5> g = raw_observation_features(
        x, static_cast<int>(t), config.velocity_window);
    const int cx = clamp_cell(x[t].x, config.room_width, config.grid_x);
    const int cy = clamp_cell(x[t].y, config.room_height, config.grid_y);
    const int bx = velocity_bin(g[2], config.velocity_thresholds);
    const int by = velocity_bin(g[3], config.velocity_thresholds);
    out[t] = (bx * config.velocity_bins() + by) * cells + cy * config.grid_x + cx;
  }
  return out;
}

PhmmParams count_init(const Dataset& data, const PhmmConfig& config) {
  if (data.sequences.empty()) throw DataError("training dataset is empty");
  const int Y = data.alphabet.size();
  const int M = config.discretizer.symbol_count();
  Counts counts(Y, M);
  for (const LabeledSequence& seq : data.sequences) {
    validate_sequence(seq, Y);
    const std::vector<int> symbols = discretize(seq.obs, config.discretizer);
    const auto visible_at = [&](int t) {
      return seq.labels[t].is_visible() ? seq.labels[t].label() : -1;
    };
    if (int y0 = visible_at(0); y0 >= 0) counts.initial[y0] += 1.0;
    for (int t = 0; t < seq.length(); ++t)
      if (int y = visible_at(t); y >= 0) counts.emission[y][symbols[t]] += 1.0;
    for (int t = 1; t < seq.length(); ++t) {
      const int yp = visible_at(t - 1);
      const int yc = visible_at(t);
      if (yp >= 0 && yc >= 0) counts.transition[yp][yc] += 1.0;
    }
  }
  return params_from_counts(counts, config.smoothing);
}

EmResult em_train(const Dataset& data, const PhmmParams& init,
                  const PhmmConfig& config) {
  if (data.sequences.empty()) throw DataError("training dataset is empty");
  if (config.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  const int Y = data.alphabet.size();
  const int M = config.discretizer.symbol_count();
  const std::vector<PreparedSequence> seqs = prepare(data, config.discretizer);

  EmResult out;
  out.params = init;
  PhmmParams prev = init;
  for (int it = 0; it < config.max_iterations; ++it) {
    Counts counts(Y, M);
    double loglik = 0.0;
    for (const PreparedSequence& ps : seqs) {
      const chain::PotentialTable pot = potentials_from(out.params, ps.symbols);
      const chain::Posteriors post = chain::posteriors(pot, ps.clamp);
      loglik += post.log_z;
      const int T = static_cast<int>(ps.symbols.size());
      for (int y = 0; y < Y; ++y)
        counts.initial[y] += post.unary_at(0, y, Y);
      for (int t = 0; t < T; ++t)
        for (int y = 0; y < Y; ++y)
          counts.emission[y][ps.symbols[t]] += post.unary_at(t, y, Y);
      for (int t = 1; t < T; ++t)
        for (int i = 0; i < Y; ++i)
          for (int j = 0; j < Y; ++j)
            counts.transition[i][j] += post.pair_at(t, i, j, Y);
    }
    // The smoothed update maximizes a posterior objective; once it stops
    // improving the data likelihood, keep the previous iterate.
    if (!out.trace.empty() && loglik < out.trace.back()) {
      out.params = prev;
      out.converged = true;
      break;
    }
    const bool small =
        !out.trace.empty() &&
        std::fabs(loglik - out.trace.back()) /
                std::max({1.0, std::fabs(loglik),
                          std::fabs(out.trace.back())}) <
            config.tolerance;
    out.trace.push_back(loglik);
    ++out.iterations;
    if (small) {
      out.converged = true;
      break;
    }
    prev = out.params;
    out.params = params_from_counts(counts, config.smoothing);
  }
  return out;
}

PhmmParams init_params(const Dataset& data, const PhmmConfig& config) {
  if (config.n_restarts < 1) throw ConfigError("n_restarts must be >= 1");
  const PhmmParams base = count_init(data, config);
  PhmmParams best;
  double best_loglik = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < config.n_restarts; ++r) {
    PhmmParams start = base;
    if (r > 0) {
      std::mt19937_64 gen(mix_seed(config.seed, static_cast<std::uint64_t>(r)));
      std::normal_distribution<double> noise(0.0, config.restart_jitter);
      const auto jitter_row = [&](std::vector<double>& row) {
        double total = 0.0;
        for (double& p : row) {
          p *= std::exp(noise(gen));
          total += p;
        }
        for (double& p : row) p /= total;
      };
      jitter_row(start.initial);
      for (auto& row : start.transition) jitter_row(row);
      for (auto& row : start.emission) jitter_row(row);
    }
    const EmResult res = em_train(data, start, config);
    if (res.trace.back() > best_loglik) {
      best_loglik = res.trace.back();
      best = res.params;
    }
  }
  return best;
}

PhmmModel train(const Dataset& data, const PhmmConfig& config) {
  PhmmModel model;
  model.alphabet = data.alphabet;
  model.discretizer = config.discretizer;
  model.params = init_params(data, config);
  return model;
}

chain::PotentialTable build_potentials(const PhmmModel& model,
                                       const ObservationSequence& x) {
  return potentials_from(model.params, discretize(x, model.discretizer));
}

double joint_loglik(const PhmmModel& model, const LabeledSequence& seq) {
  const chain::PotentialTable pot = build_potentials(model, seq.obs);
  return chain::log_partition(
      pot, chain::Constraint::from_labels(seq.labels, model.alphabet.size()));
}

std::vector<int> segment(const PhmmModel& model, const ObservationSequence& x) {
  return segment(model, x,
                 chain::Constraint::none(static_cast<int>(x.size()),
                                         model.alphabet.size()));
}

std::vector<int> segment(const PhmmModel& model, const ObservationSequence& x,
                         const chain::Constraint& constraint) {
  return chain::viterbi(build_potentials(model, x), constraint).path;
}

}  // namespace actseg::phmm
