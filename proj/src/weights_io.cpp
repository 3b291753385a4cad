#include <fstream>
#include <sstream>

#include "json.hpp"
#include "relguide/errors.hpp"
#include "relguide/neural_guidance.hpp"

namespace relguide {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "relguide-mlp";
constexpr int kVersion = 1;

}  // namespace

std::string weights_to_json(const NetworkParams& p) {
  validate_network(p);
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["layer_sizes"] = p.layer_sizes;
  j["hidden_activation"] = "tanh";
  j["output_activation"] = "identity";
  j["plan_slots"] = kPlanSlots;
  j["r_min_m"] = p.r_min;
  j["input_offset"] = p.input.offset;
  j["input_scale"] = p.input.scale;
  j["output_offset"] = p.output.offset;
  j["output_scale"] = p.output.scale;
  j["input_min"] = p.input_min;
  j["input_max"] = p.input_max;
  json layers = json::array();
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    const auto in = static_cast<std::size_t>(p.layer_sizes[l]);
    const auto out = static_cast<std::size_t>(p.layer_sizes[l + 1]);
    json rows = json::array();
    for (std::size_t r = 0; r < out; ++r) {
      const auto first = p.values.begin() + static_cast<std::ptrdiff_t>(p.weight_offset(l) + r * in);
      rows.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(in)));
    }
    const auto b = p.values.begin() + static_cast<std::ptrdiff_t>(p.bias_offset(l));
    layers.push_back(
        json{{"weights", rows}, {"biases", std::vector<double>(b, b + static_cast<std::ptrdiff_t>(out))}});
  }
  j["layers"] = layers;
  return j.dump(1);
}

NetworkParams weights_from_json(const std::string& text) {
  NetworkParams p;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw schema_error("weights: unknown format");
    if (j.at("version").get<int>() != kVersion) throw schema_error("weights: unsupported version");
    if (j.at("hidden_activation").get<std::string>() != "tanh" ||
        j.at("output_activation").get<std::string>() != "identity") {
      throw schema_error("weights: only tanh hidden / identity output activations are supported");
    }
    p.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    p.r_min = j.at("r_min_m").get<double>();
    p.input.offset = j.at("input_offset").get<std::vector<double>>();
    p.input.scale = j.at("input_scale").get<std::vector<double>>();
    p.output.offset = j.at("output_offset").get<std::vector<double>>();
    p.output.scale = j.at("output_scale").get<std::vector<double>>();
    p.input_min = j.at("input_min").get<std::vector<double>>();
    p.input_max = j.at("input_max").get<std::vector<double>>();
    const json& layers = j.at("layers");
    if (!layers.is_array() || layers.size() + 1 != p.layer_sizes.size()) {
      throw schema_error("weights: layer count does not match layer_sizes");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto rows = layers[l].at("weights").get<std::vector<std::vector<double>>>();
      const auto biases = layers[l].at("biases").get<std::vector<double>>();
      const auto in = static_cast<std::size_t>(p.layer_sizes[l]);
      const auto out = static_cast<std::size_t>(p.layer_sizes[l + 1]);
      if (rows.size() != out || biases.size() != out) {
        throw schema_error("weights: layer " + std::to_string(l) + " has the wrong output size");
      }
      for (const auto& r : rows) {
        if (r.size() != in) {
          throw schema_error("weights: layer " + std::to_string(l) + " has the wrong input size");
        }
        p.values.insert(p.values.end(), r.begin(), r.end());
      }
      p.values.insert(p.values.end(), biases.begin(), biases.end());
    }
  } catch (const json::exception& e) {
    throw schema_error(std::string("weights: ") + e.what());
  }
  try {
    validate_network(p);
  } catch (const std::invalid_argument& e) {
    throw schema_error(std::string("weights: ") + e.what());
  }
  return p;
}

void save_weights(const NetworkParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw missing_file(path);
  out << weights_to_json(p) << '\n';
}

NetworkParams load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw missing_file(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return weights_from_json(ss.str());
}

}  // namespace relguide
