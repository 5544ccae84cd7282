#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace magicspin {

/// Column-oriented result table written as CSV or as a JSON array of records.
/// Reals are written in scientific notation with 15 significant digits.
class Table {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  /// Throws when the row width does not match the header.
  void add_row(std::vector<Cell> row);

  void write_csv(std::ostream& os) const;
  void write_json(std::ostream& os) const;
  /// "csv" or "json"
  void write(std::ostream& os, const std::string& format) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_real(double v);

}  // namespace magicspin
