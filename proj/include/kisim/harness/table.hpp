#pragma once

// Tabular output. A result file is a provenance preamble of "# key: value"
// lines followed by one or more tab-separated tables:
//
//   # table: <name>
//   col_a<TAB>col_b<TAB>...<TAB>status
//   1.5<TAB>2.25<TAB>...<TAB>ok
//
// Numbers are printed with 9 significant digits. A row that could not be
// computed keeps its place, carries NaN values, and names the error code in
// the status column. Tables are separated by a blank line.

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace kisim::harness {

struct Table {
  std::string name;
  std::vector<std::string> columns;  // without the status column
  std::vector<std::vector<double>> rows;
  std::vector<std::string> status;

  void add_row(std::vector<double> values, std::string row_status = "ok");
  void add_error_row(std::vector<double> leading, const std::string& code);
  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

struct SweepResult {
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<Table> tables;

  const Table& table(const std::string& name) const;
  Table& add_table(std::string name, std::vector<std::string> columns);
  std::string meta(const std::string& key) const;  // empty when absent
};

std::string format_number(double value);

void write_result(std::ostream& out, const SweepResult& result);
std::string to_text(const SweepResult& result);

/// Inverse of write_result. Throws Error(IoError) on malformed input.
SweepResult read_result(std::istream& in);

/// Plain numeric table: optional "#" comments, a header row, whitespace- or
/// comma-separated numbers. Used for fit input.
Table read_numeric_table(std::istream& in);

}  // namespace kisim::harness
