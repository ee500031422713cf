#include "actseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "actseg/rng.hpp"

namespace actseg {

namespace {

const std::vector<std::pair<std::string, Point>>& default_landmarks() {
  static const std::vector<std::pair<std::string, Point>> landmarks = {
      {"door", {0.3, 0.3}},     {"tv_chair", {3.6, 0.8}},
      {"fridge", {3.7, 5.5}},   {"stove", {2.0, 5.7}},
      {"cupboard", {0.4, 5.2}}, {"dining_chair", {1.2, 3.0}},
  };
  return landmarks;
}

const std::vector<ActivityDef>& default_activities() {
  static const std::vector<ActivityDef> activities = {
      {"door", "cupboard"},        // 1
      {"cupboard", "fridge"},      // 2
      {"fridge", "dining_chair"},  // 3
      {"dining_chair", "door"},    // 4
      {"door", "tv_chair"},        // 5
      {"tv_chair", "cupboard"},    // 6
      {"fridge", "tv_chair"},      // 7
      {"tv_chair", "door"},        // 8
      {"fridge", "stove"},         // 9
      {"stove", "dining_chair"},   // 10
      {"fridge", "door"},          // 11
      {"dining_chair", "fridge"},  // 12
  };
  return activities;
}

const Point* find_landmark(const SynthConfig& cfg, const std::string& name) {
  for (const auto& [n, p] : cfg.landmarks)
    if (n == name) return &p;
  return nullptr;
}

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

}  // namespace

LabelAlphabet default_alphabet() {
  std::vector<std::string> names;
  for (const ActivityDef& a : default_activities())
    names.push_back(a.from + "->" + a.to);
  return LabelAlphabet(names);
}

std::vector<std::string> builtin_scenarios() {
  return {"SHORT_MEAL", "HAVE_SNACK", "NORMAL_MEAL"};
}

SynthConfig default_synth_config(const std::string& scenario) {
  SynthConfig cfg;
  cfg.landmarks = default_landmarks();
  cfg.activities = default_activities();
  cfg.scenario = scenario;
  // Synthetic walk compositions; activity rows chain head-to-tail
  // (label indices, i.e. activity number minus one).
  if (scenario == "SHORT_MEAL") {
    cfg.template_activities = {0, 1, 2, 3};
  } else if (scenario == "HAVE_SNACK") {
    cfg.template_activities = {4, 5, 1, 6, 7};
  } else if (scenario == "NORMAL_MEAL") {
    cfg.template_activities = {0, 1, 8, 9, 11, 10};
  } else {
    throw ConfigError("unknown scenario: " + scenario);
  }
  return cfg;
}

Dataset synthesize(const SynthConfig& config, int n_sequences) {
  if (n_sequences < 1) throw ConfigError("n_sequences must be >= 1");
  if (config.template_activities.empty())
    throw ConfigError("scenario template is empty");
  if (config.min_steps_per_leg < 1 ||
      config.max_steps_per_leg < config.min_steps_per_leg)
    throw ConfigError("invalid steps-per-leg range");
  for (const auto& [name, p] : config.landmarks)
    if (p.x < 0 || p.x > config.room_width || p.y < 0 ||
        p.y > config.room_height)
      throw ConfigError("landmark outside room: " + name);
  // Resolve the template into landmark legs up front.
  struct Leg {
    int label;
    Point from, to;
  };
  std::vector<Leg> legs;
  for (int a : config.template_activities) {
    if (a < 0 || a >= static_cast<int>(config.activities.size()))
      throw ConfigError("template references unknown activity " +
                        std::to_string(a + 1));
    const ActivityDef& act = config.activities[a];
    const Point* from = find_landmark(config, act.from);
    const Point* to = find_landmark(config, act.to);
    if (!from) throw ConfigError("unknown landmark: " + act.from);
    if (!to) throw ConfigError("unknown landmark: " + act.to);
    legs.push_back({a, *from, *to});
  }

  Dataset out;
  out.alphabet = LabelAlphabet([&] {
    std::vector<std::string> names;
    for (const ActivityDef& a : config.activities)
      names.push_back(a.from + "->" + a.to);
    return names;
  }());
  for (int i = 0; i < n_sequences; ++i) {
    const std::uint64_t child = mix_seed(config.seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(child);
    std::uniform_int_distribution<int> steps_dist(config.min_steps_per_leg,
                                                  config.max_steps_per_leg);
    std::normal_distribution<double> noise(0.0, config.step_noise);
    LabeledSequence seq;
    seq.meta = {config.scenario, child};
    for (const Leg& leg : legs) {
      const int n = steps_dist(rng);
      for (int s = 1; s <= n; ++s) {
        const double frac = static_cast<double>(s) / n;
        Point p{leg.from.x + frac * (leg.to.x - leg.from.x),
                leg.from.y + frac * (leg.to.y - leg.from.y)};
        if (config.step_noise > 0) {
          p.x += noise(rng);
          p.y += noise(rng);
        }
        seq.obs.push_back(p);
        seq.labels.push_back(PositionLabel::visible(leg.label));
      }
    }
    out.sequences.push_back(std::move(seq));
  }
  return out;
}

Dataset mask_labels(const Dataset& data, const MaskSpec& spec) {
  if (spec.rho < 0.0 || spec.rho > 1.0)
    throw std::invalid_argument("rho must lie in [0, 1]");
  Dataset out = data;
  for (std::size_t i = 0; i < out.sequences.size(); ++i) {
    LabeledSequence& seq = out.sequences[i];
    const int T = seq.length();
    for (const PositionLabel& pl : seq.labels)
      if (!pl.is_visible())
        throw DataError("mask_labels expects fully visible ground truth");
    const int hide = round_half_up(T * spec.rho);
    // Partial Fisher-Yates: the first `hide` entries of a shuffled index
    // array are the hidden positions.
    std::vector<int> order(T);
    for (int t = 0; t < T; ++t) order[t] = t;
    std::mt19937_64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(i)));
    for (int t = 0; t < hide; ++t) {
      std::uniform_int_distribution<int> pick(t, T - 1);
      std::swap(order[t], order[pick(rng)]);
      seq.labels[order[t]] = PositionLabel::hidden();
    }
  }
  return out;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const LabeledSequence& seq : data.sequences) {
    nlohmann::json rec;
    auto& obs = rec["obs"] = nlohmann::json::array();
    for (const Point& p : seq.obs) obs.push_back({p.x, p.y});
    auto& labels = rec["labels"] = nlohmann::json::array();
    for (const PositionLabel& pl : seq.labels) {
      if (pl.is_visible())
        labels.push_back(pl.label());
      else if (pl.is_hidden())
        labels.push_back(nullptr);
      else
        labels.push_back(pl.allowed());
    }
    rec["meta"] = {{"scenario", seq.meta.scenario}, {"seed", seq.meta.seed}};
    out << rec.dump() << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

Dataset load_dataset(const std::string& path, const LabelAlphabet& alphabet) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  Dataset data;
  data.alphabet = alphabet;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": malformed record: " + e.what());
    }
    LabeledSequence seq;
    try {
      for (const auto& p : rec.at("obs"))
        seq.obs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      for (const auto& l : rec.at("labels")) {
        if (l.is_null())
          seq.labels.push_back(PositionLabel::hidden());
        else if (l.is_array())
          seq.labels.push_back(
              PositionLabel::allowed_set(l.get<std::vector<int>>()));
        else
          seq.labels.push_back(PositionLabel::visible(l.get<int>()));
      }
      if (rec.contains("meta")) {
        const auto& meta = rec["meta"];
        seq.meta.scenario = meta.value("scenario", std::string{});
        seq.meta.seed = meta.value("seed", std::uint64_t{0});
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": malformed record: " + e.what());
    }
    try {
      validate_sequence(seq, alphabet.size());
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    data.sequences.push_back(std::move(seq));
  }
  return data;
}

void save_alphabet(const LabelAlphabet& alphabet, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const std::string& name : alphabet.names()) out << name << "\n";
}

LabelAlphabet load_alphabet(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) names.push_back(line);
  if (names.empty()) throw DataError("alphabet file is empty: " + path);
  return LabelAlphabet(std::move(names));
}

}  // namespace actseg
