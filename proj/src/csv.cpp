#include "fiscrisk/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fiscrisk/errors.hpp"

namespace fiscrisk::csv {

namespace {

std::vector<std::string> split_line(const std::string& line,
                                    const std::string& where,
                                    std::size_t lineno) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      if (!cell.empty())
        fail(ErrorCategory::parse, where + ": line " + std::to_string(lineno) +
                                       ": stray quote inside unquoted cell");
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  if (quoted)
    fail(ErrorCategory::parse, where + ": line " + std::to_string(lineno) +
                                   ": unterminated quoted cell");
  cells.push_back(std::move(cell));
  return cells;
}

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int Table::require_column(const std::string& name) const {
  int idx = column(name);
  if (idx < 0)
    fail(ErrorCategory::schema, "required column '" + name + "' not found");
  return idx;
}

Table read(std::istream& in, const std::string& stream_name) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line, stream_name, lineno);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      fail(ErrorCategory::parse,
           stream_name + ": line " + std::to_string(lineno) + ": expected " +
               std::to_string(t.header.size()) + " cells, got " +
               std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  if (t.header.empty())
    fail(ErrorCategory::parse, stream_name + ": missing header row");
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::io, "cannot open '" + path + "' for reading");
  return read(in, path);
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out << '"';
      for (char ch : c) {
        if (ch == '"') out << '"';
        out << ch;
      }
      out << '"';
    } else {
      out << c;
    }
  }
  out << '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& cell, const std::string& context,
                    std::size_t line) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  double value = 0.0;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    fail(ErrorCategory::parse, context + ": line " + std::to_string(line) +
                                   ": not a number: '" + cell + "'");
  return value;
}

int parse_int(const std::string& cell, const std::string& context,
              std::size_t line) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  int value = 0;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    fail(ErrorCategory::parse, context + ": line " + std::to_string(line) +
                                   ": not an integer: '" + cell + "'");
  return value;
}

}  // namespace fiscrisk::csv

namespace fiscrisk {

const char* to_string(ErrorCategory cat) {
  switch (cat) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::capacity: return "capacity";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::schema: return "schema";
    case ErrorCategory::data: return "data";
    case ErrorCategory::model: return "model";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::invalid: return "invalid";
  }
  return "unknown";
}

}  // namespace fiscrisk
