#pragma once

#include <string>
#include <vector>

#include "ranklq/data.hpp"

namespace ranklq {

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  DataMatrix data;
};

/// Rectangular numeric CSV with an optional header row (detected when the first row has a
/// non-numeric cell). Errors: EmptyFile, RaggedRows, NonNumericCell (1-based line and column),
/// CorruptFile when the file cannot be opened.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

DataMatrix ingest_csv(const std::string& path);

void write_csv(const std::string& path, const DataMatrix& data, const std::vector<std::string>& header = {});

}  // namespace ranklq
