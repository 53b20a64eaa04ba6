#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ncapprox {

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// Accepts "a/b" or a decimal.
double parse_fraction(const std::string& text);

/// Line-oriented `key = value` settings. Lines starting with `node` or `link`
/// are kept verbatim as topology lines; `#` starts a comment.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config from_string(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::size_t get_count(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  double get_fraction(const std::string& key, double fallback) const;
  /// Comma- or space-separated numbers.
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

  const std::vector<std::string>& topology_lines() const noexcept { return topology_; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Errc::parse_error naming the first key outside `known`.
  void require_known(const std::set<std::string>& known) const;

  /// Sorted `key = value` lines followed by the topology lines.
  std::string canonical() const;
  /// 16 lowercase hex digits of fnv1a64(canonical()).
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> topology_;
};

}  // namespace ncapprox
