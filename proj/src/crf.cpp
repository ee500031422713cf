#include "actseg/crf.hpp"

#include <cmath>
#include <memory>

namespace actseg::crf {

namespace {

double block_dot(const std::vector<double>& w, int base, const double* row,
                 int span) {
  double s = 0.0;
  for (int i = 0; i < span; ++i) s += w[base + i] * row[i];
  return s;
}

chain::PotentialTable table_from_cache(const std::vector<double>& w,
                                       const SequenceFeatureCache& cache,
                                       int num_labels, int trans_base) {
  chain::PotentialTable pot(cache.length, num_labels);
  const int span = cache.span;
  std::vector<double> obs(num_labels);
  for (int y = 0; y < num_labels; ++y)
    pot.unary(y) = block_dot(w, y * span, cache.row(0), span);
  for (int t = 1; t < cache.length; ++t) {
    for (int y = 0; y < num_labels; ++y)
      obs[y] = block_dot(w, y * span, cache.row(t), span);
    for (int i = 0; i < num_labels; ++i) {
      const int tbase = trans_base + i * num_labels;
      for (int j = 0; j < num_labels; ++j)
        pot.pair(t, i, j) = obs[j] + w[tbase + j];
    }
  }
  return pot;
}

struct PreparedSequence {
  SequenceFeatureCache cache;
  chain::Constraint clamp;
  chain::Constraint free;

  PreparedSequence(const LabeledSequence& seq, const FeatureConfig& cfg,
                   int num_labels)
      : cache(cache_sequence_features(seq.obs, cfg)),
        clamp(chain::Constraint::from_labels(seq.labels, num_labels)),
        free(chain::Constraint::none(seq.length(), num_labels)) {}
};

struct PreparedCorpus {
  int num_labels = 0;
  int trans_base = 0;
  int dim = 0;
  std::vector<PreparedSequence> seqs;

  PreparedCorpus(const Dataset& data, const FeatureConfig& cfg) {
    num_labels = data.alphabet.size();
    const FeatureIndex idx(num_labels, cfg.context_left, cfg.context_right);
    trans_base = idx.state_obs(num_labels - 1, 4, cfg.context_right) + 1;
    dim = idx.size();
    seqs.reserve(data.sequences.size());
    for (const LabeledSequence& seq : data.sequences) {
      validate_sequence(seq, num_labels);
      seqs.emplace_back(seq, cfg, num_labels);
    }
  }
};

// Penalized incomplete log-likelihood and, optionally, its gradient.
double evaluate(const std::vector<double>& w, const PreparedCorpus& corpus,
                double sigma, std::vector<double>* grad) {
  const int Y = corpus.num_labels;
  if (grad) grad->assign(corpus.dim, 0.0);
  double value = 0.0;
  for (const PreparedSequence& ps : corpus.seqs) {
    const chain::PotentialTable pot =
        table_from_cache(w, ps.cache, Y, corpus.trans_base);
    if (!grad) {
      value += chain::log_partition(pot, ps.clamp) -
               chain::log_partition(pot, ps.free);
      continue;
    }
    const chain::Posteriors pc = chain::posteriors(pot, ps.clamp);
    const chain::Posteriors pf = chain::posteriors(pot, ps.free);
    value += pc.log_z - pf.log_z;
    const int T = ps.cache.length;
    const int span = ps.cache.span;
    // State-observation features depend on the position's label only, so
    // unary marginal differences carry the whole clamped-minus-free term.
    for (int t = 0; t < T; ++t) {
      const double* row = ps.cache.row(t);
      for (int y = 0; y < Y; ++y) {
        const double coef =
            pc.unary_at(t, y, Y) - pf.unary_at(t, y, Y);
        if (coef == 0.0) continue;
        double* g = grad->data() + static_cast<std::size_t>(y) * span;
        for (int i = 0; i < span; ++i) g[i] += coef * row[i];
      }
    }
    for (int t = 1; t < T; ++t)
      for (int i = 0; i < Y; ++i)
        for (int j = 0; j < Y; ++j)
          (*grad)[corpus.trans_base + i * Y + j] +=
              pc.pair_at(t, i, j, Y) - pf.pair_at(t, i, j, Y);
  }
  const double inv_var = 1.0 / (sigma * sigma);
  double penalty = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    penalty += w[k] * w[k];
    if (grad) (*grad)[k] -= w[k] * inv_var;
  }
  return value - 0.5 * penalty * inv_var;
}

}  // namespace

chain::PotentialTable build_potentials(const CrfModel& model,
                                       const ObservationSequence& x) {
  const SequenceFeatureCache cache = cache_sequence_features(x, model.features);
  const FeatureIndex idx = model.index();
  return table_from_cache(model.weights, cache, model.alphabet.size(),
                          idx.state_trans(0, 0));
}

double sequence_incomplete_loglik(const CrfModel& model,
                                  const LabeledSequence& seq) {
  const chain::PotentialTable pot = build_potentials(model, seq.obs);
  const int Y = model.alphabet.size();
  return chain::log_partition(pot,
                              chain::Constraint::from_labels(seq.labels, Y)) -
         chain::log_partition(pot, chain::Constraint::none(seq.length(), Y));
}

double penalized_incomplete_loglik(const CrfModel& model, const Dataset& data,
                                   double sigma) {
  const PreparedCorpus corpus(data, model.features);
  return evaluate(model.weights, corpus, sigma, nullptr);
}

std::vector<double> gradient(const CrfModel& model, const Dataset& data,
                             double sigma) {
  const PreparedCorpus corpus(data, model.features);
  std::vector<double> grad;
  evaluate(model.weights, corpus, sigma, &grad);
  return grad;
}

TrainOutcome train(const Dataset& data, const TrainConfig& config) {
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

  CrfModel model;
  model.alphabet = data.alphabet;
  model.features = fit_normalization(data, FeatureConfig{});
  model.sigma = config.sigma;

  auto corpus = std::make_shared<PreparedCorpus>(data, model.features);
  const double sigma = config.sigma;
  optim::Objective obj = [corpus, sigma](const std::vector<double>& w,
                                         std::vector<double>& g) {
    std::vector<double> grad;
    const double value = evaluate(w, *corpus, sigma, &grad);
    g = std::move(grad);
    return value;
  };

  optim::OptimConfig ocfg;
  ocfg.max_iterations = config.max_iterations;
  ocfg.tolerance = config.tolerance;
  ocfg.memory = config.lbfgs_memory;
  // Secondary stop: gradient norm small relative to the dimension.
  ocfg.gradient_tolerance = 1e-5 * corpus->dim;

  std::vector<double> w0(corpus->dim, 0.0);  // zeros are an adequate start
  const optim::Result res =
      config.optimizer == TrainConfig::Optimizer::Lbfgs
          ? optim::lbfgs_maximize(obj, std::move(w0), ocfg)
          : optim::cg_polak_ribiere_maximize(obj, std::move(w0), ocfg);

  model.weights = res.x;
  return TrainOutcome{std::move(model), res.value, res.iterations, res.status};
}

std::vector<int> segment(const CrfModel& model, const ObservationSequence& x) {
  return segment(model, x,
                 chain::Constraint::none(static_cast<int>(x.size()),
                                         model.alphabet.size()));
}

std::vector<int> segment(const CrfModel& model, const ObservationSequence& x,
                         const chain::Constraint& constraint) {
  return chain::viterbi(build_potentials(model, x), constraint).path;
}

}  // namespace actseg::crf
