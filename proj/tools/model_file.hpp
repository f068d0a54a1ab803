#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "carma_hf/carma_core.hpp"

namespace carma_hf::cli {

/// Unreadable or malformed input (exit code 1).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses {"a": [...], "b": [...], "sigma2": x, "label": "..."}; unknown keys
/// and wrong types are reported as bad_orders validation errors.
inline RawModel parse_model(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::bad_orders, "model spec must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "a" && key != "b" && key != "sigma2" && key != "label")
      throw Error(ErrorCode::bad_orders, "unknown key \"" + key + "\" in model spec (allowed: a, b, sigma2, label)");
  }
  auto numbers = [&](const char* key) {
    if (!doc.contains(key)) throw Error(ErrorCode::bad_orders, std::string("missing key \"") + key + "\"");
    const auto& arr = doc.at(key);
    if (!arr.is_array()) throw Error(ErrorCode::bad_orders, std::string("\"") + key + "\" must be an array");
    std::vector<double> out;
    for (const auto& v : arr) {
      if (!v.is_number()) throw Error(ErrorCode::bad_orders, std::string("\"") + key + "\" must hold numbers");
      out.push_back(v.get<double>());
    }
    return out;
  };
  RawModel raw;
  raw.a = numbers("a");
  raw.b = numbers("b");
  if (doc.contains("sigma2")) {
    if (!doc.at("sigma2").is_number()) throw Error(ErrorCode::nonpositive_sigma2, "\"sigma2\" must be a number");
    raw.sigma2 = doc.at("sigma2").get<double>();
  }
  if (doc.contains("label")) {
    if (!doc.at("label").is_string()) throw Error(ErrorCode::bad_orders, "\"label\" must be a string");
    raw.label = doc.at("label").get<std::string>();
  }
  return raw;
}

inline RawModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_model(doc);
}

inline nlohmann::json model_to_json(const RawModel& raw) {
  nlohmann::json doc{{"a", raw.a}, {"b", raw.b}, {"sigma2", raw.sigma2}};
  if (!raw.label.empty()) doc["label"] = raw.label;
  return doc;
}

}  // namespace carma_hf::cli
