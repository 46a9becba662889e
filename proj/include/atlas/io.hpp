#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "atlas/model.hpp"

namespace atlas {

/// Shortest-safe text form used in every output file: 17 significant digits.
std::string format_double(double x);

/// Plain CSV writer; fields are written as given, doubles via format_double.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& add(double x);
  CsvWriter& add(std::size_t x);
  CsvWriter& add(const std::string& s);
  CsvWriter& add_empty();
  void end_row();
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::string row_;
  bool first_ = true;
};

/// index,gap with 1-based index.
void write_initial_csv(const std::filesystem::path& path, const GapVector& gaps);
GapVector read_initial_csv(const std::filesystem::path& path);

}  // namespace atlas
