#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fiscrisk::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // each row has header.size() cells
  // 1-based line number of each row in the original stream (header = line 1),
  // kept so parse errors downstream can point at the offending line.
  std::vector<std::size_t> line_numbers;

  int column(const std::string& name) const;         // -1 if absent
  int require_column(const std::string& name) const; // throws schema error
};

// Reads a comma-delimited table with a header row. Supports double-quoted
// fields with "" escapes; rejects rows whose cell count differs from the
// header.
Table read(std::istream& in, const std::string& stream_name = "<stream>");
Table read_file(const std::string& path);

void write_row(std::ostream& out, const std::vector<std::string>& cells);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

double parse_double(const std::string& cell, const std::string& context,
                    std::size_t line);
int parse_int(const std::string& cell, const std::string& context,
              std::size_t line);

}  // namespace fiscrisk::csv
