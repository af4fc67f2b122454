// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/io/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "epinfer/errors.hpp"

namespace epinfer {

int CsvTable::column(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(const std::filesystem::path &path, const CsvTable &table) {
  if (table.header.empty()) {
    throw Error(Errc::invalid_argument, "CSV needs at least one column");
  }
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) {
    throw Error(Errc::io, "cannot open for writing: " + path.string());
  }
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto &row : table.rows) {
    if (row.size() != table.header.size()) {
      throw Error(Errc::invalid_argument,
                  "CSV row width must match the header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) {
    throw Error(Errc::io, "write failed: " + path.string());
  }
}

CsvTable read_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot open for reading: " + path.string());
  }
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::io, "empty CSV: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream head(line);
  std::string cell;
  while (std::getline(head, cell, ',')) table.header.push_back(cell);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    const char *p = line.c_str();
    for (;;) {
      char *end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) {
        throw Error(Errc::io, "bad number in " + path.string() + " line " +
                                  std::to_string(line_no));
      }
      row.push_back(v);
      p = end;
      if (*p == ',') {
        ++p;
      } else if (*p == '\0') {
        break;
      } else {
        throw Error(Errc::io, "malformed row in " + path.string() + " line " +
                                  std::to_string(line_no));
      }
    }
    if (row.size() != table.header.size()) {
      throw Error(Errc::io, "row width mismatch in " + path.string() +
                                " line " + std::to_string(line_no));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace epinfer
