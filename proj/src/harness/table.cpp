#include "kisim/harness/table.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "kisim/error.hpp"

namespace kisim::harness {

namespace {

[[noreturn]] void io_error(const std::string& message) { throw Error(ErrorCode::IoError, message); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

double parse_number(const std::string& token) {
  if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    io_error("not a number: '" + token + "'");
  }
  if (used != token.size()) io_error("not a number: '" + token + "'");
  return v;
}

}  // namespace

void Table::add_row(std::vector<double> values, std::string row_status) {
  detail::require(values.size() == columns.size(), "table '" + name + "': row width does not match the header");
  rows.push_back(std::move(values));
  status.push_back(std::move(row_status));
}

void Table::add_error_row(std::vector<double> leading, const std::string& code) {
  leading.resize(columns.size(), std::numeric_limits<double>::quiet_NaN());
  add_row(std::move(leading), code);
}

std::size_t Table::column(const std::string& col) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == col) return i;
  throw Error(ErrorCode::InvalidArgument, "table '" + name + "' has no column '" + col + "'");
}

std::vector<double> Table::column_values(const std::string& col) const {
  const std::size_t k = column(col);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

const Table& SweepResult::table(const std::string& name) const {
  for (const auto& t : tables)
    if (t.name == name) return t;
  throw Error(ErrorCode::InvalidArgument, "result has no table '" + name + "'");
}

Table& SweepResult::add_table(std::string name, std::vector<std::string> columns) {
  Table t;
  t.name = std::move(name);
  t.columns = std::move(columns);
  tables.push_back(std::move(t));
  return tables.back();
}

std::string SweepResult::meta(const std::string& key) const {
  for (const auto& [k, v] : provenance)
    if (k == key) return v;
  return {};
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_result(std::ostream& out, const SweepResult& result) {
  for (const auto& [k, v] : result.provenance) out << "# " << k << ": " << v << '\n';
  for (std::size_t t = 0; t < result.tables.size(); ++t) {
    const Table& table = result.tables[t];
    out << '\n' << "# table: " << table.name << '\n';
    for (const auto& c : table.columns) out << c << '\t';
    out << "status\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      for (double v : table.rows[r]) out << format_number(v) << '\t';
      out << table.status[r] << '\n';
    }
  }
}

std::string to_text(const SweepResult& result) {
  std::ostringstream out;
  write_result(out, result);
  return out.str();
}

SweepResult read_result(std::istream& in) {
  SweepResult result;
  Table* current = nullptr;
  bool expect_header = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# table: ", 0) == 0) {
      current = &result.add_table(line.substr(9), {});
      expect_header = true;
      continue;
    }
    if (line.rfind("# ", 0) == 0) {
      if (current != nullptr) io_error("provenance line after the first table");
      const auto colon = line.find(": ", 2);
      if (colon == std::string::npos) io_error("malformed provenance line: " + line);
      result.provenance.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (current == nullptr) io_error("data before any table header");
    auto fields = split(line, '\t');
    if (fields.empty() || (expect_header && fields.back() != "status")) io_error("malformed table header: " + line);
    if (expect_header) {
      fields.pop_back();
      current->columns = std::move(fields);
      expect_header = false;
      continue;
    }
    if (fields.size() != current->columns.size() + 1) io_error("row width mismatch in table " + current->name);
    std::vector<double> values;
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) values.push_back(parse_number(fields[i]));
    current->add_row(std::move(values), fields.back());
  }
  return result;
}

Table read_numeric_table(std::istream& in) {
  Table t;
  t.name = "data";
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',' || ch == '\t') ch = ' ';
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (t.columns.empty()) {
      t.columns = tokens;
      continue;
    }
    if (tokens.size() != t.columns.size()) io_error("data row width does not match the header");
    std::vector<double> values;
    for (const auto& tok : tokens) values.push_back(parse_number(tok));
    t.add_row(std::move(values));
  }
  if (t.columns.empty()) io_error("data table has no header");
  return t;
}

}  // namespace kisim::harness
