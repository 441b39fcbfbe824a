#pragma once

#include <json.hpp>

#include <string>

#include "hetnet/errors.hpp"

namespace hetnet::detail {

using json = nlohmann::json;

// Typed field access with a path in the error message.
template <typename T>
T field(const json& obj, const char* key, const std::string& path) {
  const std::string where = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError("missing field '" + where + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("field '" + where + "': " + e.what());
  }
}

template <typename T>
T field_or(const json& obj, const char* key, const std::string& path, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return field<T>(obj, key, path);
}

inline json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace hetnet::detail
