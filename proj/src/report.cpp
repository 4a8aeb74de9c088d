#include "simbias/report.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "simbias/errors.hpp"

namespace simbias::harness {

namespace {

std::size_t find_column(const std::vector<std::string>& columns, const std::string& name) {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ConfigError("missing column '" + name + "'");
}

}  // namespace

std::size_t Table::column(const std::string& name) const { return find_column(columns, name); }
std::size_t CsvFile::column(const std::string& name) const { return find_column(columns, name); }

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error("failed to format a double");
  return std::string(buf.data(), ptr);
}

std::string format_cell(const Cell& c) {
  if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
  if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
  return "NA";
}

void write_csv(std::ostream& out, const Table& table, const std::vector<std::string>& provenance, bool truncated) {
  for (const auto& line : provenance) out << "# " << line << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
  if (truncated) out << "# truncated\n";
}

CsvFile read_csv(std::istream& in) {
  CsvFile f;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      f.comments.push_back(line.size() > 2 ? line.substr(2) : std::string());
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!header) {
      f.columns = std::move(fields);
      header = true;
    } else {
      if (fields.size() != f.columns.size()) throw ConfigError("CSV row has wrong number of fields");
      f.rows.push_back(std::move(fields));
    }
  }
  if (!header) throw ConfigError("CSV has no header row");
  return f;
}

}  // namespace simbias::harness
