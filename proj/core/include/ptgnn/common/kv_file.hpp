#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ptgnn {

/// Flat `key = value` text document. Lines starting with '#' are comments.
/// Keys are kept sorted so serialization is canonical.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValueDoc load(const std::filesystem::path& path);

  void save(const std::filesystem::path& path) const;
  std::string to_string() const;

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }
  void set(const std::string& key, double value);
  void set(const std::string& key, std::span<const double> values);

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

/// Strict parse of a full string as a double; throws DataError on failure.
double parse_double(std::string_view text);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace ptgnn
