// Copyright 2026 The clanerf Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Schema-checked accessors: every failure names the offending key.

#pragma once

#include <array>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "clanerf/error.hpp"
#include "clanerf/geometry.hpp"

namespace clanerf::json_util {

using nlohmann::json;

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorCode::kSchema, where + ": missing required key \"" + key + "\"");
  }
  return j.at(key);
}

inline double number(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) fail(ErrorCode::kSchema, where + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

inline int integer(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number_integer()) fail(ErrorCode::kSchema, where + ": \"" + key + "\" must be an integer");
  return v.get<int>();
}

inline std::string string(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_string()) fail(ErrorCode::kSchema, where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const json& v, std::size_t expected, const std::string& what) {
  if (!v.is_array() || (expected != 0 && v.size() != expected)) {
    fail(ErrorCode::kSchema, what + " must be an array of " + std::to_string(expected) + " numbers");
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(ErrorCode::kSchema, what + " must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline Vec3 vec3(const json& j, const char* key, const std::string& where) {
  const auto v = numbers(need(j, key, where), 3, where + ": \"" + std::string(key) + "\"");
  return {v[0], v[1], v[2]};
}

inline std::array<float, 3> rgb(const json& j, const char* key, const std::string& where) {
  const auto v = numbers(need(j, key, where), 3, where + ": \"" + std::string(key) + "\"");
  return {float(v[0]), float(v[1]), float(v[2])};
}

inline json to_array(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json to_array(const std::array<float, 3>& v) { return json::array({v[0], v[1], v[2]}); }

inline json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kSchema, path + ": invalid JSON: " + e.what());
  }
}

inline void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace clanerf::json_util
