#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace fundtrack {

// Raised for malformed input files; message always carries file and line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Minimal comma-separated reader for the fixed table schemas used here.
// Fields never contain commas or quotes, so no quoting dialect is needed.
class CsvReader {
 public:
  // Opens the file and consumes the header line, which must equal
  // `expected_header` exactly. Throws ParseError otherwise.
  CsvReader(const std::filesystem::path& path, const std::string& expected_header);
  ~CsvReader();
  CsvReader(const CsvReader&) = delete;
  CsvReader& operator=(const CsvReader&) = delete;

  // Reads the next data row into `fields`. Returns false at end of file.
  // Throws ParseError when the field count differs from the header's.
  bool next_row(std::vector<std::string>& fields);

  // Typed accessors for the current row; all throw ParseError with file,
  // line and column context on conversion failure.
  const std::string& str(const std::vector<std::string>& f, std::size_t col) const;
  double num(const std::vector<std::string>& f, std::size_t col) const;
  std::int64_t integer(const std::vector<std::string>& f, std::size_t col) const;
  bool flag(const std::vector<std::string>& f, std::size_t col) const;  // "0"/"1"
  int date(const std::vector<std::string>& f, std::size_t col) const;   // ISO day

  int line() const { return line_; }
  const std::string& path() const { return path_; }

 private:
  [[noreturn]] void fail(std::size_t col, const std::string& what) const;

  struct Impl;
  Impl* impl_;
  std::string path_;
  std::size_t n_cols_ = 0;
  int line_ = 0;
};

// Atomic text-file writer: content accumulates in a buffer and lands on disk
// via write-to-temp-then-rename, so readers never observe a partial file.
class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(std::filesystem::path path);
  void write(const std::string& text) { buffer_ += text; }
  void write_line(const std::string& text) { buffer_ += text; buffer_ += '\n'; }
  // Flushes buffer to <path>.tmp and renames over <path>. Throws on I/O error.
  void commit();

 private:
  std::filesystem::path path_;
  std::string buffer_;
  bool committed_ = false;
};

// Fixed-precision decimal formatting used by every table writer so that a
// load/write round trip is byte-identical.
std::string format_fixed(double value, int decimals);

// Rounds through the decimal representation, returning exactly the double a
// loader will parse from the written field. Plain round(v/g)*g can differ by
// one ulp from strtod of the same decimal, which would break exact
// round-trip comparisons.
double snap_decimal(double value, int decimals);

// Flat `key = value` config file: one pair per line, '#' comments, blank
// lines ignored. Typed getters throw ParseError with key and file context;
// consumption is tracked so callers can reject unknown keys.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::filesystem::path& path);
  static KeyValueFile from_text(const std::string& text, std::string origin);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_number(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_flag(const std::string& key, bool fallback) const;
  int get_date(const std::string& key) const;
  int get_date(const std::string& key, int fallback) const;

  // Keys present in the file but never read through a getter.
  std::vector<std::string> unused_keys() const;
  const std::string& origin() const { return origin_; }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string origin_;
};

}  // namespace fundtrack
