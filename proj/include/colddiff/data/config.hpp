#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "colddiff/core/errors.hpp"

namespace colddiff {

enum class ValueType { string, integer, real, boolean, real_list };

struct KeySpec {
  std::string key;  // "section.name"
  ValueType type{ValueType::string};
  std::string default_value;
  std::string help;
};

using ConfigSchema = std::vector<KeySpec>;

/// Flat, typed key-value document:
///
///     # comment
///     [train]
///     steps = 4000
///     lr = 1e-3
///
/// Keys are addressed as "section.name". Every key must appear in the schema;
/// values are validated against their declared type when set.
class Config {
 public:
  Config() = default;
  explicit Config(ConfigSchema schema) : schema_{std::move(schema)} {
    for (const auto& k : schema_) {
      if (!k.default_value.empty()) {
        check_value(k, k.default_value);
        values_[k.key] = k.default_value;
      }
    }
  }

  static Config parse(std::string_view text, ConfigSchema schema) {
    Config cfg(std::move(schema));
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string s = trim(line);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw FormatError(FormatError::Kind::bad_value, "config line " + std::to_string(lineno) + ": bad section header");
        section = trim(s.substr(1, s.size() - 2));
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw FormatError(FormatError::Kind::bad_value, "config line " + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(s.substr(0, eq));
      const std::string full = section.empty() ? key : section + "." + key;
      cfg.set(full, trim(s.substr(eq + 1)));
    }
    return cfg;
  }

  static Config load(const std::string& path, ConfigSchema schema) {
    std::ifstream f(path);
    if (!f) throw MissingInputError("config file not found: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), std::move(schema));
  }

  void set(const std::string& key, const std::string& value) {
    const KeySpec& spec = lookup(key);
    check_value(spec, value);
    values_[key] = value;
    explicit_.insert_or_assign(key, true);
  }

  bool known(const std::string& key) const {
    return std::any_of(schema_.begin(), schema_.end(), [&](const KeySpec& k) { return k.key == key; });
  }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  bool explicitly_set(const std::string& key) const { return explicit_.count(key) != 0; }

  std::string get_string(const std::string& key) const { return raw(key); }
  std::int64_t get_int(const std::string& key) const { return parse_int(raw(key)).value(); }
  double get_real(const std::string& key) const { return parse_real(raw(key)).value(); }
  bool get_bool(const std::string& key) const { return parse_bool(raw(key)).value(); }
  std::vector<double> get_reals(const std::string& key) const { return parse_list(raw(key)).value(); }

  std::optional<std::string> maybe(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  const std::map<std::string, std::string>& values() const { return values_; }
  const ConfigSchema& schema() const { return schema_; }

  /// Effective configuration in the same sectioned text format.
  std::string dump() const {
    std::ostringstream out;
    std::string current;
    bool first = true;
    for (const auto& [key, value] : values_) {
      const auto dot = key.find('.');
      const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
      const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
      if (first || section != current) {
        if (!first) out << '\n';
        if (!section.empty()) out << '[' << section << "]\n";
        current = section;
        first = false;
      }
      out << name << " = " << value << '\n';
    }
    return out.str();
  }

  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
  }

  static std::optional<std::int64_t> parse_int(std::string_view s) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return v;
  }

  static std::optional<double> parse_real(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size()) return std::nullopt;
    return v;
  }

  static std::optional<bool> parse_bool(std::string_view s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    return std::nullopt;
  }

  static std::optional<std::vector<double>> parse_list(std::string_view s) {
    std::vector<double> out;
    std::string item;
    std::istringstream in{std::string(s)};
    while (std::getline(in, item, ',')) {
      auto v = parse_real(trim(item));
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  }

 private:
  const KeySpec& lookup(const std::string& key) const {
    for (const auto& k : schema_) {
      if (k.key == key) return k;
    }
    throw std::invalid_argument("unknown config key '" + key + "'");
  }

  const std::string& raw(const std::string& key) const {
    lookup(key);
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("config key '" + key + "' has no value");
    return it->second;
  }

  static void check_value(const KeySpec& spec, const std::string& value) {
    bool ok = true;
    switch (spec.type) {
      case ValueType::string: break;
      case ValueType::integer: ok = parse_int(value).has_value(); break;
      case ValueType::real: ok = parse_real(value).has_value(); break;
      case ValueType::boolean: ok = parse_bool(value).has_value(); break;
      case ValueType::real_list: ok = parse_list(value).has_value(); break;
    }
    if (!ok) throw std::invalid_argument("config key '" + spec.key + "': invalid value '" + value + "'");
  }

  ConfigSchema schema_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

}  // namespace colddiff
