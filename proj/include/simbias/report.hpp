#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace simbias::harness {

/// Empty cells are written as NA.
using Cell = std::variant<std::monostate, std::int64_t, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t column(const std::string& name) const;
};

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
std::string format_cell(const Cell& c);

/// Writes `# `-prefixed provenance lines, the header row and the rows
/// (LF line endings, '.' decimal separator). A truncated table ends with "# truncated".
void write_csv(std::ostream& out, const Table& table, const std::vector<std::string>& provenance, bool truncated);

/// Reads a file produced by write_csv. Comment lines are returned separately.
struct CsvFile {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvFile read_csv(std::istream& in);

}  // namespace simbias::harness
