#include "causalgen/io.hpp"

#include <zlib.h>

#include <cstdio>

namespace causalgen {

LineReader::LineReader(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw DataError("cannot open input file: " + path);
  gz_ = f;
}

LineReader::~LineReader() {
  if (gz_) gzclose(static_cast<gzFile>(gz_));
}

bool LineReader::next(std::string& line) {
  line.clear();
  gzFile f = static_cast<gzFile>(gz_);
  while (true) {
    if (pos_ >= buf_.size()) {
      if (eof_) break;
      char chunk[1 << 16];
      int n = gzread(f, chunk, sizeof chunk);
      if (n < 0) throw DataError("error while reading compressed input");
      if (n == 0) {
        eof_ = true;
        break;
      }
      buf_.assign(chunk, static_cast<std::size_t>(n));
      pos_ = 0;
    }
    std::size_t nl = buf_.find('\n', pos_);
    if (nl == std::string::npos) {
      line.append(buf_, pos_, buf_.size() - pos_);
      pos_ = buf_.size();
      continue;
    }
    line.append(buf_, pos_, nl - pos_);
    pos_ = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return !line.empty();
}

std::vector<std::string> read_all_lines(const std::string& path) {
  LineReader reader(path);
  std::vector<std::string> out;
  std::string line;
  while (reader.next(line)) out.push_back(line);
  return out;
}

std::string read_file(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw DataError("cannot open file: " + path);
  std::string out;
  char buf[1 << 16];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

void write_file(const std::string& path, std::string_view content) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw DataError("cannot open file for writing: " + path);
  if (!content.empty() && std::fwrite(content.data(), 1, content.size(), f) != content.size()) {
    std::fclose(f);
    throw DataError("short write: " + path);
  }
  std::fclose(f);
}

}  // namespace causalgen
