#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "edl/nnet.hpp"

namespace edl {

// Checkpoint format "edl-mlp-v1": a JSON object with the model dimensions
// and a flat list of named tensors, each carrying its shape and row-major
// values. Stable across versions; loaders reject any other format tag.

inline nlohmann::json model_to_json(const MlpModel& model) {
  nlohmann::json j;
  j["format"] = "edl-mlp-v1";
  j["input_dim"] = model.input_dim;
  j["classes"] = model.classes;
  nlohmann::json tensors = nlohmann::json::array();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    nlohmann::json w;
    w["name"] = "layers." + std::to_string(l) + ".weight";
    w["shape"] = {layer.weight.rows, layer.weight.cols};
    w["values"] = layer.weight.data;
    tensors.push_back(std::move(w));
    nlohmann::json b;
    b["name"] = "layers." + std::to_string(l) + ".bias";
    b["shape"] = {layer.bias.size()};
    b["values"] = layer.bias;
    tensors.push_back(std::move(b));
    j["activations"].push_back(layer.activation == Activation::relu ? "relu" : "identity");
  }
  j["tensors"] = std::move(tensors);
  return j;
}

inline MlpModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "edl-mlp-v1") {
    throw std::invalid_argument("model_from_json: unsupported checkpoint format");
  }
  MlpModel model;
  model.input_dim = j.at("input_dim").get<std::size_t>();
  model.classes = j.at("classes").get<std::size_t>();
  const auto& activations = j.at("activations");
  model.layers.resize(activations.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    model.layers[l].activation =
        activations[l].get<std::string>() == "relu" ? Activation::relu : Activation::identity;
  }
  for (const auto& tensor : j.at("tensors")) {
    const std::string name = tensor.at("name").get<std::string>();
    const auto dot = name.find('.');
    const auto dot2 = name.find('.', dot + 1);
    const std::size_t l = std::stoul(name.substr(dot + 1, dot2 - dot - 1));
    if (l >= model.layers.size()) throw std::invalid_argument("model_from_json: bad tensor name");
    const auto values = tensor.at("values").get<std::vector<double>>();
    const auto shape = tensor.at("shape").get<std::vector<std::size_t>>();
    if (name.ends_with(".weight")) {
      if (shape.size() != 2 || shape[0] * shape[1] != values.size()) {
        throw std::invalid_argument("model_from_json: weight shape mismatch");
      }
      model.layers[l].weight = Matrix(shape[0], shape[1]);
      model.layers[l].weight.data = values;
    } else if (name.ends_with(".bias")) {
      if (shape.size() != 1 || shape[0] != values.size()) {
        throw std::invalid_argument("model_from_json: bias shape mismatch");
      }
      model.layers[l].bias = values;
    } else {
      throw std::invalid_argument("model_from_json: unknown tensor " + name);
    }
  }
  return model;
}

inline void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_model: cannot open " + path);
  out << model_to_json(model).dump(1) << "\n";
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_model: cannot open " + path);
  nlohmann::json j;
  in >> j;
  return model_from_json(j);
}

}  // namespace edl
