#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pullbound {

// Sectioned key-value config text:
//   [section]
//   key = value        # full-line comments start with '#'
//   expr = "-x - x^3"  # quoted values keep spaces and '#' verbatim
// Keys must appear inside a section; duplicates within a section are errors.
// Getter failures name the offending section.key.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  // Comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

  void set(const std::string& section, const std::string& key, std::string value);

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return data_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace pullbound
