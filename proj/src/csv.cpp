#include "ranklq/csv.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ranklq/calibration.hpp"
#include "ranklq/error.hpp"

namespace ranklq {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> lines;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    lines.emplace_back(line_no, split_fields(line));
  }
  if (lines.empty()) fail(ErrorCode::EmptyFile, "no rows");

  CsvTable table;
  std::size_t first = 0;
  double scratch = 0.0;
  for (const auto& cell : lines.front().second) {
    if (!parse_number(cell, scratch)) {
      table.header = lines.front().second;
      first = 1;
      break;
    }
  }
  if (first >= lines.size()) fail(ErrorCode::EmptyFile, "header without data rows");

  const std::size_t p = lines[first].second.size();
  if (!table.header.empty() && table.header.size() != p) {
    fail(ErrorCode::RaggedRows, "header has " + std::to_string(table.header.size()) + " fields, data rows have " +
                                    std::to_string(p));
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto& [number, fields] = lines[r];
    if (fields.size() != p) {
      fail(ErrorCode::RaggedRows, "line " + std::to_string(number) + " has " + std::to_string(fields.size()) +
                                      " fields, expected " + std::to_string(p));
    }
    std::vector<double> row(p);
    for (std::size_t c = 0; c < p; ++c) {
      if (!parse_number(fields[c], row[c]) || !std::isfinite(row[c])) {
        fail(ErrorCode::NonNumericCell,
             "line " + std::to_string(number) + ", column " + std::to_string(c + 1) + ": '" + fields[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  table.data = DataMatrix::from_rows(rows);
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::CorruptFile, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

DataMatrix ingest_csv(const std::string& path) { return read_csv(path).data; }

void write_csv(const std::string& path, const DataMatrix& data, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::CorruptFile, "cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  if (!header.empty()) out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.p(); ++j) out << (j ? "," : "") << format_double(data(i, j));
    out << '\n';
  }
}

}  // namespace ranklq
