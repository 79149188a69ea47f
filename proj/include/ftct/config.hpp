#pragma once

// Flat key = value configuration with dotted section names. A `[section]`
// header prefixes the keys that follow it. Comments start with '#'.
// Unknown keys are rejected against a schema, with the offending line.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ftct/error.hpp"

namespace ftct {

class ConfigError : public Error {
 public:
  ConfigError(std::string source, int line, const std::string& msg)
      : Error(ErrorKind::ConfigError, source + ":" + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class KeyValueConfig {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>") {
    KeyValueConfig c;
    c.source_ = source;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      auto hash = raw.find('#');
      std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(source, line, "unterminated section header");
        section = trim(s.substr(1, s.size() - 2));
        if (!valid_name(section, false)) throw ConfigError(source, line, "bad section name '" + section + "'");
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(source, line, "expected key = value");
      std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
      if (!section.empty()) key = section + "." + key;
      if (!valid_name(key, true)) throw ConfigError(source, line, "bad key '" + key + "'");
      if (value.empty()) throw ConfigError(source, line, "empty value for '" + key + "'");
      if (c.entries_.count(key)) throw ConfigError(source, line, "duplicate key '" + key + "'");
      c.entries_[key] = {value, line};
    }
    return c;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot read config " + path);
    return parse(in, path);
  }

  void require_known(const std::set<std::string>& schema) const {
    for (const auto& [k, e] : entries_)
      if (!schema.count(k)) throw ConfigError(source_, e.line, "unknown key '" + k + "'");
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line_of(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }
  const std::string& source() const { return source_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? entries_.at(key).value : fallback;
  }
  std::string require_string(const std::string& key) const {
    if (!has(key)) throw ConfigError(source_, 0, "missing required key '" + key + "'");
    return entries_.at(key).value;
  }
  double get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return to_double(entries_.at(key));
  }
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& e = entries_.at(key);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || p != e.value.data() + e.value.size())
      throw ConfigError(source_, e.line, "expected an integer for '" + key + "'");
    return v;
  }
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& e = entries_.at(key);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || p != e.value.data() + e.value.size())
      throw ConfigError(source_, e.line, "expected an unsigned integer for '" + key + "'");
    return v;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& e = entries_.at(key);
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError(source_, e.line, "expected a boolean for '" + key + "'");
  }
  std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const auto& e = entries_.at(key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double({trim(item), e.line}));
    return out;
  }

  // Errors tied to the line of an existing key.
  [[noreturn]] void reject(const std::string& key, const std::string& msg) const {
    throw ConfigError(source_, line_of(key), msg);
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  // identifiers separated by at most one dot (two levels)
  static bool valid_name(const std::string& s, bool allow_dot) {
    if (s.empty() || s.front() == '.' || s.back() == '.') return false;
    int dots = 0;
    for (char ch : s) {
      if (ch == '.') {
        ++dots;
      } else if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_')) {
        return false;
      }
    }
    return allow_dot ? dots <= 1 : dots == 0;
  }

  double to_double(const Entry& e) const {
    try {
      std::size_t pos = 0;
      double v = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(source_, e.line, "expected a number, got '" + e.value + "'");
    }
  }

  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace ftct
