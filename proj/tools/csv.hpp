#pragma once

#include <string>
#include <vector>

// CSV and small file helpers for the CLI. RFC-4180 style: quoted fields,
// doubled-quote escapes, CRLF tolerated, header row required.
namespace cli::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

Table read_file(const std::string& path);
Table parse(const std::string& text, const std::string& origin);

/// Strict double parse; the exception message carries the 1-based data row,
/// the column name, and the offending text. Non-finite values are rejected.
double parse_double(const std::string& cell, std::size_t row,
                    const std::string& column);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string join_row(const std::vector<std::string>& cells);

/// Write via a temp file and rename so the target never holds partial data.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_entire_file(const std::string& path);

}  // namespace cli::csv
