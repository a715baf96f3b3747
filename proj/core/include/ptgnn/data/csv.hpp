#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ptgnn/data/event.hpp"

namespace ptgnn::data {

/// Column-order descriptor: the header name the file uses for each canonical
/// column, in canonical order (32 names).
struct CsvSchema {
  std::vector<std::string> columns;
  /// When set, the file may carry extra columns and columns are located by
  /// name; otherwise the header must equal `columns` exactly.
  bool allow_extra_columns = false;

  static CsvSchema canonical();
  /// Reads a mapping file: one header name per line in canonical order,
  /// '#' comments allowed. Mapped schemas allow extra columns.
  static CsvSchema load(const std::filesystem::path& path);
};

EventTable parse_csv(const std::filesystem::path& path, const CsvSchema& schema = CsvSchema::canonical());

/// Writes the canonical header and one row per event. Values use the
/// shortest round-trip decimal form, so output is byte-stable.
void write_csv(const std::filesystem::path& path, const EventTable& table);

}  // namespace ptgnn::data
