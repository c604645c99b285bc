#pragma once

// Minimal JSON-schema checker for the subset the published schemas use:
// type, required, properties, items, enum. Returns the first violation as a
// path-prefixed message, or an empty string when the instance conforms.

#include <string>

#include <json.hpp>

namespace schemacheck {

inline bool type_matches(const nlohmann::json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "number") return value.is_number();
  if (type == "null") return value.is_null();
  return false;
}

inline std::string validate(const nlohmann::json& value,
                            const nlohmann::json& schema,
                            const std::string& path = "$") {
  if (schema.contains("type")) {
    if (!type_matches(value, schema["type"].get<std::string>()))
      return path + ": expected type " + schema["type"].get<std::string>();
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& candidate : schema["enum"]) ok |= (candidate == value);
    if (!ok) return path + ": not in enum";
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"])
      if (!value.contains(key.get<std::string>()))
        return path + ": missing required key " + key.get<std::string>();
  }
  if (schema.contains("properties") && value.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items()) {
      if (!value.contains(key)) continue;
      const std::string err = validate(value[key], sub, path + "." + key);
      if (!err.empty()) return err;
    }
  }
  if (schema.contains("items") && value.is_array()) {
    std::size_t i = 0;
    for (const auto& element : value) {
      const std::string err =
          validate(element, schema["items"], path + "[" + std::to_string(i) + "]");
      if (!err.empty()) return err;
      ++i;
    }
  }
  return {};
}

}  // namespace schemacheck
