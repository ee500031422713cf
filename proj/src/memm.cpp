#include "actseg/memm.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "actseg/logspace.hpp"

namespace actseg::memm {

namespace {

double block_dot(const std::vector<double>& w, int base, const double* row,
                 int span) {
  double s = 0.0;
  for (int i = 0; i < span; ++i) s += w[base + i] * row[i];
  return s;
}

void fill_obs_scores(const std::vector<double>& w,
                     const SequenceFeatureCache& cache, int t, int num_labels,
                     std::vector<double>& out) {
  const double* row = cache.row(t);
  for (int y = 0; y < num_labels; ++y)
    out[y] = block_dot(w, y * cache.span, row, cache.span);
}

chain::PotentialTable local_table_from_cache(const std::vector<double>& w,
                                             const SequenceFeatureCache& cache,
                                             int num_labels, int trans_base) {
  chain::PotentialTable pot(cache.length, num_labels);
  std::vector<double> obs(num_labels);
  std::vector<double> scores(num_labels);
  fill_obs_scores(w, cache, 0, num_labels, obs);
  double lse = log_sum_exp(obs);
  for (int y = 0; y < num_labels; ++y) pot.unary(y) = obs[y] - lse;
  for (int t = 1; t < cache.length; ++t) {
    fill_obs_scores(w, cache, t, num_labels, obs);
    for (int i = 0; i < num_labels; ++i) {
      const int tbase = trans_base + i * num_labels;
      for (int j = 0; j < num_labels; ++j) scores[j] = obs[j] + w[tbase + j];
      lse = log_sum_exp(scores);
      for (int j = 0; j < num_labels; ++j)
        pot.pair(t, i, j) = scores[j] - lse;
    }
  }
  return pot;
}

struct PreparedSequence {
  SequenceFeatureCache cache;
  chain::Constraint clamp;

  PreparedSequence(const LabeledSequence& seq, const FeatureConfig& cfg,
                   int num_labels)
      : cache(cache_sequence_features(seq.obs, cfg)),
        clamp(chain::Constraint::from_labels(seq.labels, num_labels)) {}
};

struct PreparedCorpus {
  int num_labels = 0;
  int trans_base = 0;
  int dim = 0;
  std::vector<PreparedSequence> seqs;

  PreparedCorpus(const Dataset& data, const FeatureConfig& cfg) {
    num_labels = data.alphabet.size();
    const FeatureIndex idx(num_labels, cfg.context_left, cfg.context_right);
    trans_base = idx.state_trans(0, 0);
    dim = idx.size();
    seqs.reserve(data.sequences.size());
    for (const LabeledSequence& seq : data.sequences) {
      validate_sequence(seq, num_labels);
      seqs.emplace_back(seq, cfg, num_labels);
    }
  }
};

double corpus_loglik(const std::vector<double>& w,
                     const PreparedCorpus& corpus, double sigma) {
  double value = 0.0;
  for (const PreparedSequence& ps : corpus.seqs) {
    const chain::PotentialTable pot =
        local_table_from_cache(w, ps.cache, corpus.num_labels,
                               corpus.trans_base);
    value += chain::log_partition(pot, ps.clamp);
  }
  double penalty = 0.0;
  for (double wk : w) penalty += wk * wk;
  return value - 0.5 * penalty / (sigma * sigma);
}

// Expected complete-data objective Q(w) under frozen posteriors, penalized.
double q_objective(const std::vector<double>& w, const PreparedCorpus& corpus,
                   const std::vector<chain::Posteriors>& posts, double sigma,
                   std::vector<double>& grad) {
  const int Y = corpus.num_labels;
  grad.assign(corpus.dim, 0.0);
  double value = 0.0;
  std::vector<double> obs(Y), scores(Y), probs(Y), obs_coef(Y);
  for (std::size_t si = 0; si < corpus.seqs.size(); ++si) {
    const PreparedSequence& ps = corpus.seqs[si];
    const chain::Posteriors& post = posts[si];
    const int T = ps.cache.length;
    const int span = ps.cache.span;
    for (int t = 0; t < T; ++t) {
      fill_obs_scores(w, ps.cache, t, Y, obs);
      std::fill(obs_coef.begin(), obs_coef.end(), 0.0);
      if (t == 0) {
        const double lse = log_sum_exp(obs);
        for (int j = 0; j < Y; ++j) {
          const double q = post.unary_at(0, j, Y);
          value += q * (obs[j] - lse);
          obs_coef[j] = q - std::exp(obs[j] - lse);
        }
      } else {
        for (int i = 0; i < Y; ++i) {
          const double row_weight = post.unary_at(t - 1, i, Y);
          if (row_weight == 0.0) continue;
          const int tbase = corpus.trans_base + i * Y;
          for (int j = 0; j < Y; ++j) scores[j] = obs[j] + w[tbase + j];
          const double lse = log_sum_exp(scores);
          for (int j = 0; j < Y; ++j) {
            const double q = post.pair_at(t, i, j, Y);
            value += q * (scores[j] - lse);
            const double c = q - row_weight * std::exp(scores[j] - lse);
            grad[tbase + j] += c;
            obs_coef[j] += c;
          }
        }
      }
      const double* row = ps.cache.row(t);
      for (int j = 0; j < Y; ++j) {
        if (obs_coef[j] == 0.0) continue;
        double* g = grad.data() + static_cast<std::size_t>(j) * span;
        for (int k = 0; k < span; ++k) g[k] += obs_coef[j] * row[k];
      }
    }
  }
  const double inv_var = 1.0 / (sigma * sigma);
  double penalty = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    penalty += w[k] * w[k];
    grad[k] -= w[k] * inv_var;
  }
  return value - 0.5 * penalty * inv_var;
}

struct StepResult {
  std::vector<double> weights;
  double loglik = 0.0;
};

StepResult em_step_prepared(const std::vector<double>& w,
                            const PreparedCorpus& corpus,
                            const EmConfig& config) {
  std::vector<chain::Posteriors> posts;
  posts.reserve(corpus.seqs.size());
  for (const PreparedSequence& ps : corpus.seqs)
    posts.push_back(chain::posteriors(
        local_table_from_cache(w, ps.cache, corpus.num_labels,
                               corpus.trans_base),
        ps.clamp));

  const double sigma = config.sigma;
  optim::Objective obj = [&corpus, &posts, sigma](const std::vector<double>& x,
                                                  std::vector<double>& g) {
    return q_objective(x, corpus, posts, sigma, g);
  };
  const optim::Result res =
      optim::cg_polak_ribiere_maximize(obj, w, config.inner);

  StepResult out;
  out.weights = res.x;
  out.loglik = corpus_loglik(out.weights, corpus, sigma);
  return out;
}

}  // namespace

std::vector<double> local_distribution(const MemmModel& model,
                                       const ObservationSequence& x, int t,
                                       int y_prev) {
  const int Y = model.alphabet.size();
  if (t < 0 || t >= static_cast<int>(x.size()))
    throw std::invalid_argument("local_distribution: position out of range");
  if (y_prev != kStartLabel && (y_prev < 0 || y_prev >= Y))
    throw std::invalid_argument("local_distribution: bad previous label");
  const SequenceFeatureCache cache = cache_sequence_features(x, model.features);
  const FeatureIndex idx = model.index();
  std::vector<double> scores(Y);
  fill_obs_scores(model.weights, cache, t, Y, scores);
  if (y_prev != kStartLabel)
    for (int j = 0; j < Y; ++j)
      scores[j] += model.weights[idx.state_trans(y_prev, j)];
  const double lse = log_sum_exp(scores);
  for (int j = 0; j < Y; ++j) scores[j] = std::exp(scores[j] - lse);
  return scores;
}

chain::PotentialTable local_log_prob_table(const MemmModel& model,
                                           const ObservationSequence& x) {
  const SequenceFeatureCache cache = cache_sequence_features(x, model.features);
  const FeatureIndex idx = model.index();
  return local_table_from_cache(model.weights, cache, model.alphabet.size(),
                                idx.state_trans(0, 0));
}

double sequence_incomplete_loglik(const MemmModel& model,
                                  const LabeledSequence& seq) {
  const chain::PotentialTable pot = local_log_prob_table(model, seq.obs);
  const chain::Constraint clamp =
      chain::Constraint::from_labels(seq.labels, model.alphabet.size());
  return chain::log_partition(pot, clamp);
}

double penalized_incomplete_loglik(const MemmModel& model, const Dataset& data,
                                   double sigma) {
  const PreparedCorpus corpus(data, model.features);
  return corpus_loglik(model.weights, corpus, sigma);
}

EmStepResult em_step(const MemmModel& model, const Dataset& data,
                     const EmConfig& config) {
  const PreparedCorpus corpus(data, model.features);
  StepResult step = em_step_prepared(model.weights, corpus, config);
  EmStepResult out;
  out.model = model;
  out.model.weights = std::move(step.weights);
  out.penalized_loglik = step.loglik;
  return out;
}

TrainOutcome train(const Dataset& data, const EmConfig& config) {
  if (data.sequences.empty()) throw DataError("training dataset is empty");
  bool any_visible = false;
  for (const LabeledSequence& seq : data.sequences)
    for (const PositionLabel& pl : seq.labels)
      if (pl.is_visible()) {
        any_visible = true;
        break;
      }
  if (!any_visible)
    throw NumericalError(
        "dataset has no visible label; the objective is constant");

  TrainOutcome out;
  out.model.alphabet = data.alphabet;
  out.model.features = fit_normalization(data, FeatureConfig{});
  out.model.sigma = config.sigma;

  const PreparedCorpus corpus(data, out.model.features);
  std::vector<double> w(corpus.dim, 0.0);
  double prev = corpus_loglik(w, corpus, config.sigma);
  out.trace.push_back(prev);

  for (int it = 0; it < config.max_outer_iterations; ++it) {
    StepResult step = em_step_prepared(w, corpus, config);
    if (step.loglik < prev - 1e-9) {
      out.halted_early = true;
      break;
    }
    w = std::move(step.weights);
    out.trace.push_back(step.loglik);
    ++out.outer_iterations;
    const double denom =
        std::max({1.0, std::fabs(step.loglik), std::fabs(prev)});
    const bool small = std::fabs(step.loglik - prev) / denom <
                       config.outer_tolerance;
    prev = step.loglik;
    if (small) {
      out.converged = true;
      break;
    }
  }
  out.model.weights = std::move(w);
  out.objective = prev;
  return out;
}

std::vector<int> segment(const MemmModel& model, const ObservationSequence& x) {
  return segment(model, x,
                 chain::Constraint::none(static_cast<int>(x.size()),
                                         model.alphabet.size()));
}

std::vector<int> segment(const MemmModel& model, const ObservationSequence& x,
                         const chain::Constraint& constraint) {
  return chain::viterbi(local_log_prob_table(model, x), constraint).path;
}

}  // namespace actseg::memm
