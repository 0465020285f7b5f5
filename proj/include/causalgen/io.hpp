#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "causalgen/errors.hpp"

namespace causalgen {

// Line reader over plain-text or gzip files (detected transparently).
class LineReader {
 public:
  explicit LineReader(const std::string& path);
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;
  ~LineReader();

  // Returns false at end of input. The line is stripped of trailing \n / \r\n.
  bool next(std::string& line);

 private:
  void* gz_ = nullptr;
  std::string buf_;
  std::size_t pos_ = 0;
  bool eof_ = false;
};

std::vector<std::string> read_all_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace causalgen
