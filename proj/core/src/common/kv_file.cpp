#include "ptgnn/common/kv_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ptgnn/common/errors.hpp"

namespace ptgnn {

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && (text[b] == ' ' || text[b] == '\t' || text[b] == '\r' || text[b] == '\n')) ++b;
  while (e > b && (text[e - 1] == ' ' || text[e - 1] == '\t' || text[e - 1] == '\r' || text[e - 1] == '\n')) --e;
  return std::string(text.substr(b, e - b));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) {
    throw DataError("not a number: '" + t + "'");
  }
  return value;
}

KeyValueDoc KeyValueDoc::parse(std::string_view text, const std::string& origin) {
  KeyValueDoc doc;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    doc.entries_[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void KeyValueDoc::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_string();
}

std::string KeyValueDoc::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

const std::string& KeyValueDoc::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw DataError("missing key '" + key + "'");
  return it->second;
}

std::string KeyValueDoc::get_or(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValueDoc::get_double(const std::string& key) const {
  try {
    return parse_double(get(key));
  } catch (const DataError& e) {
    throw DataError("key '" + key + "': " + e.what());
  }
}

long long KeyValueDoc::get_int(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError("key '" + key + "': not an integer: '" + v + "'");
  }
  return out;
}

std::vector<double> KeyValueDoc::get_doubles(const std::string& key) const {
  std::vector<double> out;
  const std::string& v = get(key);
  if (v.empty()) return out;
  for (const auto& item : split(v, ',')) out.push_back(parse_double(item));
  return out;
}

void KeyValueDoc::set(const std::string& key, double value) { entries_[key] = format_double(value); }

void KeyValueDoc::set(const std::string& key, std::span<const double> values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += format_double(values[i]);
  }
  entries_[key] = s;
}

}  // namespace ptgnn
