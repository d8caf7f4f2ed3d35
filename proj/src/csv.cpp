#include "fundtrack/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fundtrack/dates.hpp"

namespace fundtrack {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

struct CsvReader::Impl {
  std::ifstream in;
};

CsvReader::CsvReader(const std::filesystem::path& path,
                     const std::string& expected_header)
    : impl_(new Impl), path_(path.string()) {
  impl_->in.open(path);
  if (!impl_->in) {
    delete impl_;
    throw ParseError("cannot open " + path_);
  }
  std::string header;
  if (!std::getline(impl_->in, header)) {
    delete impl_;
    throw ParseError(path_ + ":1: empty file, expected header \"" +
                     expected_header + "\"");
  }
  if (!header.empty() && header.back() == '\r') header.pop_back();
  line_ = 1;
  if (header != expected_header) {
    const std::string msg = path_ + ":1: bad header, expected \"" +
                            expected_header + "\" got \"" + header + "\"";
    delete impl_;
    throw ParseError(msg);
  }
  n_cols_ = split_csv(expected_header).size();
}

CsvReader::~CsvReader() { delete impl_; }

bool CsvReader::next_row(std::vector<std::string>& fields) {
  std::string row;
  for (;;) {
    if (!std::getline(impl_->in, row)) return false;
    ++line_;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (!row.empty()) break;  // tolerate a trailing blank line
  }
  fields = split_csv(row);
  if (fields.size() != n_cols_) {
    throw ParseError(path_ + ":" + std::to_string(line_) + ": expected " +
                     std::to_string(n_cols_) + " fields, got " +
                     std::to_string(fields.size()));
  }
  return true;
}

const std::string& CsvReader::str(const std::vector<std::string>& f,
                                  std::size_t col) const {
  if (f[col].empty()) fail(col, "empty field");
  return f[col];
}

double CsvReader::num(const std::vector<std::string>& f, std::size_t col) const {
  const std::string& s = f[col];
  if (s.empty()) fail(col, "empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) {
    fail(col, "not a number: \"" + s + "\"");
  }
  return v;
}

std::int64_t CsvReader::integer(const std::vector<std::string>& f,
                                std::size_t col) const {
  const std::string& s = f[col];
  if (s.empty()) fail(col, "empty integer field");
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) {
    fail(col, "not an integer: \"" + s + "\"");
  }
  return v;
}

bool CsvReader::flag(const std::vector<std::string>& f, std::size_t col) const {
  const std::string& s = f[col];
  if (s == "0") return false;
  if (s == "1") return true;
  fail(col, "expected 0 or 1, got \"" + s + "\"");
}

int CsvReader::date(const std::vector<std::string>& f, std::size_t col) const {
  try {
    return parse_date(f[col]);
  } catch (const std::invalid_argument& e) {
    fail(col, e.what());
  }
}

void CsvReader::fail(std::size_t col, const std::string& what) const {
  throw ParseError(path_ + ":" + std::to_string(line_) + ": column " +
                   std::to_string(col + 1) + ": " + what);
}

AtomicFileWriter::AtomicFileWriter(std::filesystem::path path)
    : path_(std::move(path)) {}

void AtomicFileWriter::commit() {
  if (committed_) throw std::logic_error("AtomicFileWriter: double commit");
  const std::filesystem::path tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path_);
  committed_ = true;
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  // Normalize negative zero so output never depends on rounding direction.
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') {
    s.erase(0, 1);
  }
  return s;
}

double snap_decimal(double value, int decimals) {
  return std::strtod(format_fixed(value, decimals).c_str(), nullptr);
}

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path.string());
}

KeyValueFile KeyValueFile::from_text(const std::string& text, std::string origin) {
  KeyValueFile kv;
  kv.origin_ = std::move(origin);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(kv.origin_ + ":" + std::to_string(line_no) +
                       ": expected key = value, got \"" + stripped + "\"");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(kv.origin_ + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!kv.values_.emplace(key, value).second) {
      throw ParseError(kv.origin_ + ":" + std::to_string(line_no) +
                       ": duplicate key \"" + key + "\"");
    }
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(key, "missing required key");
  used_.insert(key);
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_number(const std::string& key) const {
  const std::string s = get_string(key);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size() || s.empty()) {
    fail(key, "not a number: \"" + s + "\"");
  }
  return v;
}

double KeyValueFile::get_number(const std::string& key, double fallback) const {
  used_.insert(key);
  return values_.count(key) ? get_number(key) : fallback;
}

std::int64_t KeyValueFile::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size() || s.empty()) {
    fail(key, "not an integer: \"" + s + "\"");
  }
  return v;
}

std::int64_t KeyValueFile::get_int(const std::string& key,
                                   std::int64_t fallback) const {
  used_.insert(key);
  return values_.count(key) ? get_int(key) : fallback;
}

bool KeyValueFile::get_flag(const std::string& key, bool fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "1" || it->second == "true") return true;
  if (it->second == "0" || it->second == "false") return false;
  fail(key, "expected 0/1/true/false, got \"" + it->second + "\"");
}

int KeyValueFile::get_date(const std::string& key) const {
  const std::string s = get_string(key);
  try {
    return parse_date(s);
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

int KeyValueFile::get_date(const std::string& key, int fallback) const {
  used_.insert(key);
  return values_.count(key) ? get_date(key) : fallback;
}

std::vector<std::string> KeyValueFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    (void)value;
    if (!used_.count(key)) out.push_back(key);
  }
  return out;
}

void KeyValueFile::fail(const std::string& key, const std::string& what) const {
  throw ParseError(origin_ + ": key \"" + key + "\": " + what);
}

}  // namespace fundtrack
