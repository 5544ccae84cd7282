#include "magicspin/table.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace magicspin {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.14e", v);
  return buf;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw std::invalid_argument("table row width does not match header");
  rows_.push_back(std::move(row));
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << csv_escape(columns_[c]);
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      if (const auto* d = std::get_if<double>(&row[c])) os << format_real(*d);
      else if (const auto* i = std::get_if<long long>(&row[c])) os << *i;
      else os << csv_escape(std::get<std::string>(row[c]));
    }
    os << '\n';
  }
}

void Table::write_json(std::ostream& os) const {
  os << "[\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    os << "  {";
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) os << ", ";
      os << json_escape(columns_[c]) << ": ";
      const Cell& cell = rows_[r][c];
      if (const auto* d = std::get_if<double>(&cell)) {
        if (std::isfinite(*d)) os << format_real(*d);
        else os << "null";
      } else if (const auto* i = std::get_if<long long>(&cell)) {
        os << *i;
      } else {
        os << json_escape(std::get<std::string>(cell));
      }
    }
    os << (r + 1 < rows_.size() ? "},\n" : "}\n");
  }
  os << "]\n";
}

void Table::write(std::ostream& os, const std::string& format) const {
  if (format == "csv") write_csv(os);
  else if (format == "json") write_json(os);
  else throw std::invalid_argument("unknown output format: " + format);
}

}  // namespace magicspin
