#include "ncapprox/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "ncapprox/error.hpp"

namespace ncapprox {

std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& text, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::logic_error&) {
    throw Error(Errc::parse_error, fmt::format("{}: '{}' is not a number", key, text));
  }
  if (used != text.size()) throw Error(Errc::parse_error, fmt::format("{}: '{}' is not a number", key, text));
  return v;
}

}  // namespace

double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return to_double(trim(text), "fraction");
  const double num = to_double(trim(text.substr(0, slash)), "fraction");
  const double den = to_double(trim(text.substr(slash + 1)), "fraction");
  if (den == 0.0) throw Error(Errc::parse_error, fmt::format("fraction '{}' divides by zero", text));
  return num / den;
}

Config Config::parse(std::istream& in) {
  Config c;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.rfind("node ", 0) == 0 || line.rfind("link ", 0) == 0) {
      c.topology_.push_back(line);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::parse_error, fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(Errc::parse_error, fmt::format("line {}: empty key", line_no));
    if (c.values_.count(key)) throw Error(Errc::parse_error, fmt::format("line {}: '{}' set twice", line_no, key));
    c.values_[key] = value;
  }
  return c;
}

Config Config::from_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, fmt::format("cannot open config '{}'", path));
  return parse(in);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(it->second, key);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(it->second, &used, 0);
  } catch (const std::logic_error&) {
    throw Error(Errc::parse_error, fmt::format("{}: '{}' is not an integer", key, it->second));
  }
  if (used != it->second.size()) throw Error(Errc::parse_error, fmt::format("{}: '{}' is not an integer", key, it->second));
  return v;
}

std::size_t Config::get_count(const std::string& key, std::size_t fallback) const {
  const std::int64_t v = get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw Error(Errc::parse_error, fmt::format("{} must be non-negative", key));
  return static_cast<std::size_t>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = it->second;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Errc::parse_error, fmt::format("{}: '{}' is not a boolean", key, it->second));
}

double Config::get_fraction(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_fraction(it->second);
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string text = it->second;
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<double> out;
  for (std::string tok; in >> tok;) out.push_back(parse_fraction(tok));
  if (out.empty()) throw Error(Errc::parse_error, fmt::format("{}: empty list", key));
  return out;
}

void Config::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_)
    if (!known.count(key)) throw Error(Errc::parse_error, fmt::format("unknown config key '{}'", key));
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [key, value] : values_) out += fmt::format("{} = {}\n", key, value);
  for (const auto& line : topology_) out += line + "\n";
  return out;
}

std::string Config::hash() const { return fmt::format("{:016x}", fnv1a64(canonical())); }

}  // namespace ncapprox
