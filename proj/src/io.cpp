#include "atlas/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace atlas {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& h : header) add(h);
  end_row();
}

CsvWriter& CsvWriter::add(const std::string& s) {
  if (!first_) row_ += ',';
  row_ += s;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::add(double x) { return add(format_double(x)); }
CsvWriter& CsvWriter::add(std::size_t x) { return add(std::to_string(x)); }
CsvWriter& CsvWriter::add_empty() { return add(std::string()); }

void CsvWriter::end_row() {
  row_ += '\n';
  out_ << row_;
  row_.clear();
  first_ = true;
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw std::runtime_error("failed writing " + path_.string());
}

void write_initial_csv(const std::filesystem::path& path, const GapVector& gaps) {
  CsvWriter w(path, {"index", "gap"});
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    w.add(i + 1).add(gaps[i]);
    w.end_row();
  }
  w.close();
}

GapVector read_initial_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open initial-condition file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("initial-condition file is empty");
  if (line.rfind("index,gap", 0) != 0) throw std::runtime_error("initial-condition header must be index,gap");
  GapVector gaps;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    std::string idx, val;
    if (!std::getline(row, idx, ',') || !std::getline(row, val)) {
      throw std::runtime_error("malformed initial-condition row at line " + std::to_string(lineno));
    }
    std::size_t pos = 0;
    const unsigned long index = std::stoul(idx, &pos);
    if (index != gaps.size() + 1) {
      throw std::runtime_error("initial-condition indices must be 1, 2, ... (line " +
                               std::to_string(lineno) + ")");
    }
    gaps.push_back(std::stod(val));
  }
  validate_gaps(gaps);
  return gaps;
}

}  // namespace atlas
