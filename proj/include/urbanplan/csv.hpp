#pragma once

// Minimal reader/writer for the comma-separated numeric files the pipeline
// exchanges. No quoting: every field is a number or a boolean flag.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "urbanplan/errors.hpp"

namespace urbanplan::csv {

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Shortest representation that reads back to the same double.
inline std::string format(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

/// Streams rows of a CSV file whose header must equal `expected_header`.
/// Errors carry "file:line:column".
class Reader {
 public:
  Reader(std::string path, const std::vector<std::string>& expected_header) : path_(std::move(path)), in_(path_) {
    if (!in_) throw DataError("cannot open " + path_);
    std::string header;
    if (!std::getline(in_, header)) throw DataError(path_ + ":1: missing header row");
    line_no_ = 1;
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
    const auto cols = split(trim(header));
    bool ok = cols.size() == expected_header.size();
    for (std::size_t i = 0; ok && i < cols.size(); ++i) ok = trim(cols[i]) == expected_header[i];
    if (!ok) {
      std::string want;
      for (std::size_t i = 0; i < expected_header.size(); ++i) want += (i ? "," : "") + expected_header[i];
      throw DataError(path_ + ":1: header must be '" + want + "'");
    }
    width_ = expected_header.size();
  }

  /// Advances to the next non-empty row; false at end of file.
  bool next() {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (trim(line_).empty()) continue;
      fields_ = split(trim(line_));
      if (fields_.size() != width_) {
        throw DataError(location(std::min(fields_.size(), width_) + 1) + ": expected " + std::to_string(width_) +
                        " fields, found " + std::to_string(fields_.size()));
      }
      return true;
    }
    return false;
  }

  double real(std::size_t col) const {
    const std::string_view f = trim(fields_[col]);
    double value = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), value);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
      throw DataError(location(col + 1) + ": not a number: '" + std::string(f) + "'");
    }
    return value;
  }

  std::int64_t integer(std::size_t col) const {
    const std::string_view f = trim(fields_[col]);
    std::int64_t value = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), value);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
      throw DataError(location(col + 1) + ": not an integer: '" + std::string(f) + "'");
    }
    return value;
  }

  bool flag(std::size_t col) const {
    const std::string_view f = trim(fields_[col]);
    if (f == "1" || f == "true") return true;
    if (f == "0" || f == "false") return false;
    throw DataError(location(col + 1) + ": not a boolean flag: '" + std::string(f) + "'");
  }

  std::string_view field(std::size_t col) const { return trim(fields_[col]); }

  std::string location(std::size_t column) const {
    return path_ + ":" + std::to_string(line_no_) + ":" + std::to_string(column);
  }

  std::size_t line_number() const noexcept { return line_no_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::vector<std::string_view> fields_;
  std::size_t width_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace urbanplan::csv
