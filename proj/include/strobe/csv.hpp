// csv.hpp — deterministic CSV helpers (17 significant digits, LF endings).
#pragma once

#include <string>
#include <vector>

namespace strobe {

std::string fmt17(double x);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<double>& values);
  std::string str() const { return text_; }
  void save(const std::string& path) const;

 private:
  std::size_t columns_;
  std::string text_;
};

}  // namespace strobe
