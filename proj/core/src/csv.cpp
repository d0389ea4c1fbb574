#include "feekit/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "feekit/errors.hpp"

namespace feekit {

namespace {

// RFC-4180-ish field splitting: double quotes guard commas, "" escapes a quote.
std::vector<std::string> splitLine(const std::string& line, const std::string& origin,
                                   size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw ParseError(origin + ":" + std::to_string(line_no) + ": unterminated quote");
  }
  fields.push_back(cur);
  return fields;
}

bool needsQuoting(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

void appendField(std::string& out, const std::string& s) {
  if (!needsQuoting(s)) {
    out += s;
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

int CsvTable::columnIndex(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return int(i);
  }
  return -1;
}

CsvTable parseCsv(const std::string& content, const std::string& origin) {
  CsvTable table;
  std::istringstream in(content);
  std::string line;
  size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header && line[0] == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    auto fields = splitLine(line, origin, line_no);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw ParseError(origin + ": missing header row");
  return table;
}

CsvTable readCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseCsv(buf.str(), path);
}

std::string formatCsv(const CsvTable& table) {
  std::string out;
  for (const auto& c : table.comments) {
    out.push_back('#');
    out += c;
    out.push_back('\n');
  }
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (i) out.push_back(',');
    appendField(out, table.header[i]);
  }
  out.push_back('\n');
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      appendField(out, row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

void writeCsv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file '" + path + "'");
  out << formatCsv(table);
}

std::string formatDouble(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return std::string(buf);
}

}  // namespace feekit
