// Copyright 2026 The hkdmpc Authors
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

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkd/core/types.hpp"

namespace hkd {

/// Structured text config: `[section]` headers, `key = value` lines,
/// `#` comments. Values may be scalars, words, or space-separated vectors.
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in, const std::string& origin = "<stream>") {
    Config cfg;
    cfg.origin_ = origin;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": unterminated section");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty())
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[section + "." + key] = value;
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse(in, path);
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key) const {
    auto it = values_.find(section + "." + key);
    if (it == values_.end())
      throw std::runtime_error(origin_ + ": missing [" + section + "] " + key);
    return it->second;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return to_double(get_string(section, key), section, key);
  }
  double get_double(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
  }

  int get_int(const std::string& section, const std::string& key) const {
    return static_cast<int>(std::lround(get_double(section, key)));
  }
  int get_int(const std::string& section, const std::string& key, int fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get_string(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error(origin_ + ": [" + section + "] " + key + ": expected bool, got " + v);
  }

  std::vector<double> get_vector(const std::string& section, const std::string& key) const {
    std::istringstream ss(get_string(section, key));
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_double(tok, section, key));
    return out;
  }

  Vector3d get_vec3(const std::string& section, const std::string& key) const {
    auto v = get_vector(section, key);
    if (v.size() != 3)
      throw std::runtime_error(origin_ + ": [" + section + "] " + key + ": expected 3 values");
    return Vector3d(v[0], v[1], v[2]);
  }
  Vector3d get_vec3(const std::string& section, const std::string& key,
                    const Vector3d& fallback) const {
    return has(section, key) ? get_vec3(section, key) : fallback;
  }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section + "." + key] = value;
  }

  const std::string& origin() const { return origin_; }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  double to_double(const std::string& tok, const std::string& section,
                   const std::string& key) const {
    try {
      std::size_t used = 0;
      double d = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return d;
    } catch (const std::exception&) {
      throw std::runtime_error(origin_ + ": [" + section + "] " + key + ": bad number '" + tok + "'");
    }
  }

  std::map<std::string, std::string> values_;
  std::string origin_ = "<empty>";
};

}  // namespace hkd
