#include "ptgnn/data/csv.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/kv_file.hpp"

namespace ptgnn::data {

const std::vector<std::string>& canonical_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c;
    for (const char* group : {"phi", "theta", "bend", "time", "ring", "front", "mask"}) {
      for (std::size_t s = 0; s < kStations; ++s) c.push_back(std::string(group) + "_s" + std::to_string(s));
    }
    c.insert(c.end(), {"straightness", "zone", "median_theta", "q_over_pt"});
    return c;
  }();
  return columns;
}

CsvSchema CsvSchema::canonical() { return CsvSchema{canonical_columns(), false}; }

CsvSchema CsvSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file " + path.string());
  CsvSchema schema;
  schema.allow_extra_columns = true;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    schema.columns.push_back(t);
  }
  if (schema.columns.size() != canonical_columns().size()) {
    throw DataError("schema file " + path.string() + " lists " + std::to_string(schema.columns.size()) +
                    " columns, expected " + std::to_string(canonical_columns().size()));
  }
  return schema;
}

EventTable parse_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  std::vector<std::string> header;
  for (auto& h : split(line, ',')) header.push_back(trim(h));

  // position[i] = file column holding canonical column i
  std::vector<std::size_t> position(schema.columns.size());
  if (schema.allow_extra_columns) {
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t i = 0; i < header.size(); ++i) where.emplace(header[i], i);
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
      auto it = where.find(schema.columns[i]);
      if (it == where.end()) {
        throw DataError(path.string() + ": header mismatch, missing column '" + schema.columns[i] + "'");
      }
      position[i] = it->second;
    }
  } else {
    const std::size_t n = std::max(header.size(), schema.columns.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (i >= header.size()) {
        throw DataError(path.string() + ": header mismatch, missing column '" + schema.columns[i] + "'");
      }
      if (i >= schema.columns.size() || header[i] != schema.columns[i]) {
        throw DataError(path.string() + ": header mismatch at column " + std::to_string(i + 1) + " ('" +
                        header[i] + "')");
      }
      position[i] = i;
    }
  }

  EventTable table;
  std::size_t row = 0;
  std::vector<double> values(schema.columns.size());
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    for (std::size_t i = 0; i < position.size(); ++i) {
      if (position[i] >= cells.size()) {
        throw DataError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " cells");
      }
      try {
        values[i] = parse_double(cells[position[i]]);
      } catch (const DataError&) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ", column '" + header[position[i]] +
                        "': non-numeric value '" + trim(cells[position[i]]) + "'");
      }
    }
    RawEvent ev;
    for (std::size_t i = 0; i < kFullFeatures; ++i) ev.station_features[i] = values[i];
    for (std::size_t i = 0; i < kRoadFeatures; ++i) ev.road_features[i] = values[kFullFeatures + i];
    ev.q_over_pt = values[kRawFeatures];
    if (!std::isfinite(ev.q_over_pt) || ev.q_over_pt == 0.0) {
      ++table.dropped;
      continue;
    }
    table.rows.push_back(ev);
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const EventTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto& cols = canonical_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    out << cols[i];
  }
  out << '\n';
  std::string line;
  for (const auto& ev : table.rows) {
    line.clear();
    for (double v : ev.station_features) {
      line += format_double(v);
      line += ',';
    }
    for (double v : ev.road_features) {
      line += format_double(v);
      line += ',';
    }
    line += format_double(ev.q_over_pt);
    line += '\n';
    out << line;
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace ptgnn::data
