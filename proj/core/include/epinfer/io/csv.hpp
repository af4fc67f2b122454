// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_IO_CSV_HPP
#define EPINFER_IO_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace epinfer {

// Plain numeric CSV: one header row of column names, then one row of doubles
// per line. Values are written with 17 significant digits so every double
// round trips; lines end with LF regardless of platform.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(std::string_view name) const noexcept;  // -1 if absent
};

void write_csv(const std::filesystem::path &path, const CsvTable &table);

CsvTable read_csv(const std::filesystem::path &path);

// Formats one double the way write_csv does.
std::string format_double(double value);

}  // namespace epinfer

#endif  // EPINFER_IO_CSV_HPP
