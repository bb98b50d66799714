#pragma once

// Tiny CSV/text artifact writers.  Doubles are printed with 17 significant
// digits so that a strtod round trip recovers the exact binary value, which
// keeps file-based regression comparisons bitwise.

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "vlexp/util.hpp"

namespace vlexp {

// Shortest-round-trip-safe decimal form of x.
inline std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw ValidationError("cannot open '" + path + "' for writing");
  }

  // One row of raw cells (no quoting; callers never emit commas in cells).
  void cells(const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out_ << ',';
      out_ << row[i];
    }
    out_ << '\n';
  }

  void header(std::initializer_list<const char*> names) {
    std::vector<std::string> row;
    for (const char* n : names) row.emplace_back(n);
    cells(row);
  }

  void row(const std::vector<double>& vals) {
    std::vector<std::string> c;
    c.reserve(vals.size());
    for (double v : vals) c.push_back(g17(v));
    cells(c);
  }

  // Label in the first cell, numbers after it.
  void row(const std::string& label, const std::vector<double>& vals) {
    std::vector<std::string> c;
    c.reserve(vals.size() + 1);
    c.push_back(label);
    for (double v : vals) c.push_back(g17(v));
    cells(c);
  }

  // Verbatim line (used for `# section` markers between blocks).
  void line(const std::string& s) { out_ << s << '\n'; }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << content;
}

// Raw doubles, row-major, native endianness; the layout lives in a text
// header written next to the payload.
inline void write_binary_doubles(const std::string& path, const std::vector<double>& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace vlexp
