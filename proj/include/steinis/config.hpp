#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace steinis {

/// Malformed or inconsistent configuration. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration; `#` starts a comment. Later assignments
/// of the same key win, which is how command-line overrides are applied.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  /// Applies one "key=value" override.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Whitespace- or comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Parses "50,100,200" or "50 100 200".
std::vector<double> parse_number_list(const std::string& text, const std::string& what);

}  // namespace steinis
