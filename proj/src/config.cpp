#include "pullbound/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "pullbound/io.hpp"

namespace pullbound {
namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& section, const std::string& key, std::string_view text) {
  const auto stripped = strip(text);
  double value = 0.0;
  const auto* end = stripped.data() + stripped.size();
  const auto [ptr, ec] = std::from_chars(stripped.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(section + "." + key + ": expected a number, got '" + std::string(stripped) +
                      "'");
  }
  return value;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text.remove_prefix(newline == std::string_view::npos ? text.size() : newline + 1);
    ++line_no;

    line = strip(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_line(line_no, "unterminated section header");
      const auto name = strip(line.substr(1, line.size() - 2));
      if (name.empty()) fail_line(line_no, "empty section name");
      section = std::string(name);
      cfg.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail_line(line_no, "expected 'key = value'");
    const auto key = strip(line.substr(0, eq));
    if (key.empty()) fail_line(line_no, "empty key");
    if (section.empty()) fail_line(line_no, "key '" + std::string(key) + "' outside any section");
    auto value = strip(line.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') fail_line(line_no, "unterminated quoted value");
      value = value.substr(1, value.size() - 2);
    }
    auto& sec = cfg.data_[section];
    const std::string key_str(key);
    if (sec.count(key_str) != 0) {
      fail_line(line_no, "duplicate key '" + section + "." + key_str + "'");
    }
    sec[key_str] = std::string(value);
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse(text);
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto sec = data_.find(section);
  return sec != data_.end() && sec->second.count(key) != 0;
}

bool Config::has_section(const std::string& section) const { return data_.count(section) != 0; }

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const auto sec = data_.find(section);
  if (sec != data_.end()) {
    const auto it = sec->second.find(key);
    if (it != sec->second.end()) return it->second;
  }
  throw ConfigError("missing required key " + section + "." + key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  return parse_double(section, key, get_string(section, key));
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key) const {
  const double v = get_double(section, key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError(section + "." + key + ": expected an integer");
  }
  return i;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key) const {
  const auto text = get_string(section, key);
  const auto stripped = strip(text);
  std::uint64_t value = 0;
  const auto* end = stripped.data() + stripped.size();
  const auto [ptr, ec] = std::from_chars(stripped.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(section + "." + key + ": expected an unsigned integer, got '" +
                      std::string(stripped) + "'");
  }
  return value;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
  return has(section, key) ? get_u64(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key) const {
  auto text = get_string(section, key);
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(section + "." + key + ": expected a boolean, got '" + text + "'");
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  return has(section, key) ? get_bool(section, key) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& section, const std::string& key) const {
  const auto text = get_string(section, key);
  std::vector<double> out;
  std::string_view rest(text);
  while (true) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    if (strip(item).empty()) {
      throw ConfigError(section + "." + key + ": empty list entry");
    }
    out.push_back(parse_double(section, key, item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, std::string value) {
  data_[section][key] = std::move(value);
}

}  // namespace pullbound
