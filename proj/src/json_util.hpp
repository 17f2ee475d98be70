#pragma once

// Checked accessors shared by the JSON readers.

#include <string>

#include "whatif/json_io.hpp"

namespace whatif::detail {

inline const Json& require(const Json& obj, const char* key) {
  if (!obj.is_object()) throw DataError(std::string("expected an object holding '") + key + "'");
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("missing key '") + key + "'");
  return *it;
}

template <typename T>
T get_as(const Json& value, const char* what) {
  try {
    return value.get<T>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("bad value for '") + what + "': " + e.what());
  }
}

template <typename T>
T field(const Json& obj, const char* key) {
  return get_as<T>(require(obj, key), key);
}

template <typename T>
T field_or(const Json& obj, const char* key, T fallback) {
  if (!obj.is_object()) return fallback;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return get_as<T>(*it, key);
}

inline const Json& array_field(const Json& obj, const char* key) {
  const Json& v = require(obj, key);
  if (!v.is_array()) throw DataError(std::string("'") + key + "' must be an array");
  return v;
}

}  // namespace whatif::detail
