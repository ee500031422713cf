#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "actseg/dataset.hpp"
#include "actseg/experiment.hpp"
#include "actseg/metrics.hpp"
#include "actseg/model_io.hpp"

namespace {

using namespace actseg;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

LabelAlphabet alphabet_or_default(const std::string& path) {
  return path.empty() ? default_alphabet() : load_alphabet(path);
}

std::vector<std::vector<int>> visible_labels(const Dataset& data,
                                             const char* what) {
  std::vector<std::vector<int>> out;
  out.reserve(data.sequences.size());
  for (const LabeledSequence& seq : data.sequences) {
    std::vector<int> labels(seq.length());
    for (int t = 0; t < seq.length(); ++t) {
      if (!seq.labels[t].is_visible())
        throw DataError(std::string(what) +
                        " must carry a visible label at every position");
      labels[t] = seq.labels[t].label();
    }
    out.push_back(std::move(labels));
  }
  return out;
}

struct SynthArgs {
  std::string scenario = "SHORT_MEAL";
  int n = 12;
  std::uint64_t seed = 0;
  double noise = 0.08;
  std::string out;
  std::string alphabet_out;
};

int cmd_synth(const SynthArgs& args) {
  SynthConfig config = default_synth_config(args.scenario);
  config.seed = args.seed;
  config.step_noise = args.noise;
  const Dataset data = synthesize(config, args.n);
  save_dataset(data, args.out);
  if (!args.alphabet_out.empty()) save_alphabet(data.alphabet, args.alphabet_out);
  std::cout << "wrote " << data.size() << " sequences to " << args.out << "\n";
  return 0;
}

struct MaskArgs {
  std::string data;
  std::string alphabet;
  double rho = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_mask(const MaskArgs& args) {
  const Dataset data = load_dataset(args.data, alphabet_or_default(args.alphabet));
  const Dataset masked = mask_labels(data, MaskSpec{args.rho, args.seed});
  save_dataset(masked, args.out);
  std::cout << "wrote " << masked.size() << " masked sequences to " << args.out
            << "\n";
  return 0;
}

struct TrainArgs {
  std::string model;
  std::string data;
  std::string alphabet;
  std::string out;
  double sigma = -1.0;  // negative = family default
  int max_iterations = -1;
  std::string optimizer = "lbfgs";
  double smoothing = 0.1;
  int restarts = 5;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& args) {
  const Dataset data = load_dataset(args.data, alphabet_or_default(args.alphabet));
  if (args.model == "crf") {
    crf::TrainConfig config;
    if (args.sigma > 0) config.sigma = args.sigma;
    if (args.max_iterations > 0) config.max_iterations = args.max_iterations;
    config.optimizer = args.optimizer == "cg" ? crf::TrainConfig::Optimizer::Cg
                                              : crf::TrainConfig::Optimizer::Lbfgs;
    const crf::TrainOutcome outcome = crf::train(data, config);
    io::save_crf(outcome.model, args.out);
    std::cout << "crf trained: objective " << outcome.objective << " after "
              << outcome.iterations << " iterations ("
              << optim::to_string(outcome.status) << ")\n";
  } else if (args.model == "memm") {
    memm::EmConfig config;
    if (args.sigma > 0) config.sigma = args.sigma;
    if (args.max_iterations > 0) config.max_outer_iterations = args.max_iterations;
    const memm::TrainOutcome outcome = memm::train(data, config);
    io::save_memm(outcome.model, args.out);
    std::cout << "memm trained: objective " << outcome.objective << " after "
              << outcome.outer_iterations << " EM iterations"
              << (outcome.halted_early ? " (halted: M-step stopped improving)"
                                       : "")
              << "\n";
  } else {
    phmm::PhmmConfig config;
    config.smoothing = args.smoothing;
    config.n_restarts = args.restarts;
    config.seed = args.seed;
    if (args.max_iterations > 0) config.max_iterations = args.max_iterations;
    const phmm::PhmmModel model = phmm::train(data, config);
    io::save_phmm(model, args.out);
    std::cout << "phmm trained (" << config.n_restarts << " restarts)\n";
  }
  return 0;
}

struct SegmentArgs {
  std::string model;
  std::string data;
  std::string alphabet;
  std::string out;
  bool constrained = false;
};

int cmd_segment(const SegmentArgs& args) {
  const std::string family = io::peek_model_family(args.model);
  Dataset data;
  Dataset out;

  const auto constraint_for = [&](const LabeledSequence& seq, int num_labels) {
    return args.constrained
               ? chain::Constraint::from_labels(seq.labels, num_labels)
               : chain::Constraint::none(seq.length(), num_labels);
  };
  const auto emit = [&](const LabeledSequence& seq, std::vector<int> path) {
    LabeledSequence pred;
    pred.obs = seq.obs;
    pred.meta = seq.meta;
    pred.labels.reserve(path.size());
    for (int y : path) pred.labels.push_back(PositionLabel::visible(y));
    out.sequences.push_back(std::move(pred));
  };

  if (family == "crf") {
    const crf::CrfModel model = io::load_crf(args.model);
    data = load_dataset(args.data, model.alphabet);
    out.alphabet = model.alphabet;
    for (const LabeledSequence& seq : data.sequences)
      emit(seq, crf::segment(model, seq.obs,
                             constraint_for(seq, model.alphabet.size())));
  } else if (family == "memm") {
    const memm::MemmModel model = io::load_memm(args.model);
    data = load_dataset(args.data, model.alphabet);
    out.alphabet = model.alphabet;
    for (const LabeledSequence& seq : data.sequences)
      emit(seq, memm::segment(model, seq.obs,
                              constraint_for(seq, model.alphabet.size())));
  } else if (family == "phmm") {
    const phmm::PhmmModel model = io::load_phmm(args.model);
    data = load_dataset(args.data, model.alphabet);
    out.alphabet = model.alphabet;
    for (const LabeledSequence& seq : data.sequences)
      emit(seq, phmm::segment(model, seq.obs,
                              constraint_for(seq, model.alphabet.size())));
  } else {
    throw DataError("unknown model family: " + family);
  }
  save_dataset(out, args.out);
  std::cout << "wrote " << out.size() << " segmented sequences to " << args.out
            << "\n";
  return 0;
}

struct EvalArgs {
  std::string truth;
  std::string pred;
  std::string alphabet;
  std::string out;
  std::string model = "-";
  std::string scenario = "-";
  double rho = 0.0;
  int repetition = 0;
};

int cmd_eval(const EvalArgs& args) {
  const LabelAlphabet alphabet = alphabet_or_default(args.alphabet);
  const Dataset truth = load_dataset(args.truth, alphabet);
  const Dataset pred = load_dataset(args.pred, alphabet);
  metrics::ReportMeta meta;
  meta.model = args.model;
  meta.scenario = args.scenario;
  meta.rho = args.rho;
  meta.repetition = args.repetition;
  const metrics::MetricsReport report = metrics::score(
      visible_labels(truth, "truth"), visible_labels(pred, "prediction"),
      alphabet.size(), std::move(meta));
  std::ofstream file(args.out);
  if (!file) throw DataError("cannot write " + args.out);
  metrics::write_report_csv(file, {report});
  std::cout << "macro P " << report.macro_precision << " R "
            << report.macro_recall << " F1 " << report.macro_f1 << " over "
            << report.tokens << " tokens\n";
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
};

int cmd_experiment(const ExperimentArgs& args) {
  experiment::ExperimentConfig config;
  if (!args.config.empty()) config = experiment::load_config(args.config);
  if (args.seed_set) config.master_seed = args.seed;
  if (args.jobs > 0) config.jobs = args.jobs;
  const experiment::ExperimentResult result = experiment::run(config);
  experiment::write_outputs(result, args.out_dir);
  std::cout << result.reports.size() << " cells scored, "
            << result.failures.size() << " failed; outputs in " << args.out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajectory activity segmentation toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic data");
  synth_cmd->add_option("--scenario", synth.scenario, "scenario template")
      ->default_val(synth.scenario);
  synth_cmd->add_option("--n", synth.n, "number of sequences")
      ->default_val(synth.n);
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--noise", synth.noise, "per-axis step noise, meters")
      ->default_val(synth.noise);
  synth_cmd->add_option("--out", synth.out, "output dataset")->required();
  synth_cmd->add_option("--alphabet-out", synth.alphabet_out,
                        "also write the label alphabet");

  MaskArgs mask;
  CLI::App* mask_cmd = app.add_subcommand("mask", "hide labels at ratio rho");
  mask_cmd->add_option("--data", mask.data, "input dataset")->required();
  mask_cmd->add_option("--alphabet", mask.alphabet, "alphabet file");
  mask_cmd->add_option("--rho", mask.rho, "portion of labels to hide")
      ->required();
  mask_cmd->add_option("--seed", mask.seed, "masking seed");
  mask_cmd->add_option("--out", mask.out, "output dataset")->required();

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--model", train.model, "model family")
      ->required()
      ->check(CLI::IsMember({"crf", "memm", "phmm"}));
  train_cmd->add_option("--data", train.data, "training dataset")->required();
  train_cmd->add_option("--alphabet", train.alphabet, "alphabet file");
  train_cmd->add_option("--out", train.out, "model file")->required();
  train_cmd->add_option("--sigma", train.sigma,
                        "regularization sigma (default 5 crf / 20 memm)");
  train_cmd->add_option("--max-iterations", train.max_iterations,
                        "iteration cap");
  train_cmd->add_option("--optimizer", train.optimizer, "crf optimizer")
      ->check(CLI::IsMember({"lbfgs", "cg"}));
  train_cmd->add_option("--smoothing", train.smoothing, "phmm smoothing")
      ->default_val(train.smoothing);
  train_cmd->add_option("--restarts", train.restarts, "phmm restarts")
      ->default_val(train.restarts);
  train_cmd->add_option("--seed", train.seed, "phmm restart seed");

  SegmentArgs segment;
  CLI::App* segment_cmd = app.add_subcommand("segment", "label sequences");
  segment_cmd->add_option("--model", segment.model, "model file")->required();
  segment_cmd->add_option("--data", segment.data, "input dataset")->required();
  segment_cmd->add_option("--out", segment.out, "predictions")->required();
  segment_cmd->add_flag("--constrained", segment.constrained,
                        "clamp visible input labels during decoding");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score predictions");
  eval_cmd->add_option("--truth", eval.truth, "ground-truth dataset")
      ->required();
  eval_cmd->add_option("--pred", eval.pred, "predicted dataset")->required();
  eval_cmd->add_option("--alphabet", eval.alphabet, "alphabet file");
  eval_cmd->add_option("--out", eval.out, "report CSV")->required();
  eval_cmd->add_option("--report-model", eval.model, "model column value");
  eval_cmd->add_option("--report-scenario", eval.scenario,
                       "scenario column value");
  eval_cmd->add_option("--report-rho", eval.rho, "rho column value");
  eval_cmd->add_option("--report-repetition", eval.repetition,
                       "repetition column value");

  ExperimentArgs experiment;
  CLI::App* experiment_cmd =
      app.add_subcommand("experiment", "run the rho sweep");
  experiment_cmd->add_option("--config", experiment.config,
                             "key = value config file");
  experiment_cmd->add_option("--out-dir", experiment.out_dir,
                             "output directory")
      ->required();
  CLI::Option* seed_opt =
      experiment_cmd->add_option("--seed", experiment.seed, "master seed");
  experiment_cmd->add_option("--jobs", experiment.jobs,
                             "parallel cells (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (mask_cmd->parsed()) return cmd_mask(mask);
    if (train_cmd->parsed()) return cmd_train(train);
    if (segment_cmd->parsed()) return cmd_segment(segment);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (experiment_cmd->parsed()) {
      ExperimentArgs args = experiment;
      args.seed_set = seed_opt->count() > 0;
      return cmd_experiment(args);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "bad argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
