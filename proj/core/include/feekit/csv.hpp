#pragma once

#include <string>
#include <vector>

namespace feekit {

/// A raw CSV table: one header row plus string cells. Comment lines starting
/// with '#' before the header are preserved separately so emitted tables can
/// carry version/config stamps without breaking round trips.
struct CsvTable {
  std::vector<std::string> comments;  // without leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int columnIndex(const std::string& name) const;  // -1 when absent
};

CsvTable readCsv(const std::string& path);
CsvTable parseCsv(const std::string& content, const std::string& origin);
void writeCsv(const std::string& path, const CsvTable& table);
std::string formatCsv(const CsvTable& table);

/// Shortest decimal digits that round-trip a double; used everywhere a table
/// is emitted so reruns are byte-identical.
std::string formatDouble(double v);

}  // namespace feekit
