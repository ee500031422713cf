#include "actseg/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace actseg::io {

namespace {

using nlohmann::json;

json load_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("family") ||
      !doc["family"].is_string())
    throw DataError(path + ": missing model family tag");
  return doc;
}

void write_document(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << doc.dump(2) << "\n";
}

void expect_family(const json& doc, const std::string& family,
                   const std::string& path) {
  if (doc["family"].get<std::string>() != family)
    throw DataError(path + ": expected family '" + family + "', found '" +
                    doc["family"].get<std::string>() + "'");
}

json features_to_json(const FeatureConfig& cfg) {
  return json{{"velocity_window", cfg.velocity_window},
              {"context_left", cfg.context_left},
              {"context_right", cfg.context_right},
              {"mean", cfg.mean},
              {"stddev", cfg.stddev}};
}

FeatureConfig features_from_json(const json& j, const std::string& path) {
  try {
    FeatureConfig cfg;
    cfg.velocity_window = j.at("velocity_window").get<int>();
    cfg.context_left = j.at("context_left").get<int>();
    cfg.context_right = j.at("context_right").get<int>();
    cfg.mean = j.at("mean").get<std::array<double, 5>>();
    cfg.stddev = j.at("stddev").get<std::array<double, 5>>();
    cfg.fitted = true;
    return cfg;
  } catch (const json::exception& e) {
    throw DataError(path + ": bad feature config: " + e.what());
  }
}

template <typename Model>
json linear_model_to_json(const Model& model, const std::string& family) {
  return json{{"family", family},
              {"alphabet", model.alphabet.names()},
              {"features", features_to_json(model.features)},
              {"sigma", model.sigma},
              {"weights", model.weights}};
}

template <typename Model>
Model linear_model_from_json(const json& doc, const std::string& path) {
  try {
    Model model;
    model.alphabet =
        LabelAlphabet(doc.at("alphabet").get<std::vector<std::string>>());
    model.features = features_from_json(doc.at("features"), path);
    model.sigma = doc.at("sigma").get<double>();
    model.weights = doc.at("weights").get<std::vector<double>>();
    if (static_cast<int>(model.weights.size()) != model.index().size())
      throw DataError(path + ": weight vector length does not match alphabet");
    return model;
  } catch (const json::exception& e) {
    throw DataError(path + ": bad model document: " + e.what());
  }
}

}  // namespace

void save_crf(const crf::CrfModel& model, const std::string& path) {
  write_document(linear_model_to_json(model, "crf"), path);
}

crf::CrfModel load_crf(const std::string& path) {
  const json doc = load_document(path);
  expect_family(doc, "crf", path);
  return linear_model_from_json<crf::CrfModel>(doc, path);
}

void save_memm(const memm::MemmModel& model, const std::string& path) {
  write_document(linear_model_to_json(model, "memm"), path);
}

memm::MemmModel load_memm(const std::string& path) {
  const json doc = load_document(path);
  expect_family(doc, "memm", path);
  return linear_model_from_json<memm::MemmModel>(doc, path);
}

void save_phmm(const phmm::PhmmModel& model, const std::string& path) {
  const json doc{
      {"family", "phmm"},
      {"alphabet", model.alphabet.names()},
      {"discretizer",
       {{"room_width", model.discretizer.room_width},
        {"room_height", model.discretizer.room_height},
        {"grid_x", model.discretizer.grid_x},
        {"grid_y", model.discretizer.grid_y},
        {"velocity_thresholds", model.discretizer.velocity_thresholds},
        {"velocity_window", model.discretizer.velocity_window}}},
      {"params",
       {{"initial", model.params.initial},
        {"transition", model.params.transition},
        {"emission", model.params.emission}}}};
  write_document(doc, path);
}

phmm::PhmmModel load_phmm(const std::string& path) {
  const json doc = load_document(path);
  expect_family(doc, "phmm", path);
  try {
    phmm::PhmmModel model;
    model.alphabet =
        LabelAlphabet(doc.at("alphabet").get<std::vector<std::string>>());
    const json& d = doc.at("discretizer");
    model.discretizer.room_width = d.at("room_width").get<double>();
    model.discretizer.room_height = d.at("room_height").get<double>();
    model.discretizer.grid_x = d.at("grid_x").get<int>();
    model.discretizer.grid_y = d.at("grid_y").get<int>();
    model.discretizer.velocity_thresholds =
        d.at("velocity_thresholds").get<std::vector<double>>();
    model.discretizer.velocity_window = d.at("velocity_window").get<int>();
    const json& p = doc.at("params");
    model.params.initial = p.at("initial").get<std::vector<double>>();
    model.params.transition =
        p.at("transition").get<std::vector<std::vector<double>>>();
    model.params.emission =
        p.at("emission").get<std::vector<std::vector<double>>>();
    const int Y = model.alphabet.size();
    const int M = model.discretizer.symbol_count();
    if (model.params.num_labels() != Y ||
        static_cast<int>(model.params.transition.size()) != Y ||
        static_cast<int>(model.params.emission.size()) != Y)
      throw DataError(path + ": parameter shapes do not match alphabet");
    for (const auto& row : model.params.transition)
      if (static_cast<int>(row.size()) != Y)
        throw DataError(path + ": transition row has wrong length");
    for (const auto& row : model.params.emission)
      if (static_cast<int>(row.size()) != M)
        throw DataError(path + ": emission row has wrong length");
    return model;
  } catch (const json::exception& e) {
    throw DataError(path + ": bad model document: " + e.what());
  }
}

std::string peek_model_family(const std::string& path) {
  return load_document(path)["family"].get<std::string>();
}

}  // namespace actseg::io
