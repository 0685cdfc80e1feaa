#ifndef FAIRPSY_TABLE_HPP
#define FAIRPSY_TABLE_HPP

#include "fairpsy/core.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fairpsy {

enum class ColumnKind { identifier, boolean, integer, floating, categorical, date, time };

using Date = std::chrono::sys_days;
using TimeOfDay = std::chrono::seconds;

/// A table cell. `std::monostate` marks a missing value; identifier and
/// categorical columns hold strings.
using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string, Date, TimeOfDay>;

struct Column {
  std::string name;
  ColumnKind kind;

  bool operator==(const Column&) const = default;
};

using Schema = std::vector<Column>;

inline bool is_missing(const Cell& cell) { return std::holds_alternative<std::monostate>(cell); }

/// Typed column-oriented record set. Rows are checked against the schema on
/// insertion: one cell per column, each cell missing or of the column's kind.
class Table {
 public:
  Table() = default;
  Table(std::string name, Schema columns);

  void add_row(std::vector<Cell> row);

  const std::string& name() const { return name_; }
  const Schema& columns() const { return columns_; }
  std::size_t n_rows() const { return rows_.size(); }
  std::size_t n_cols() const { return columns_.size(); }

  std::optional<std::size_t> find_column(std::string_view column) const;
  /// Throws DataError naming the table when the column is absent.
  std::size_t column_index(std::string_view column) const;

  const Cell& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  const std::vector<Cell>& row(std::size_t r) const { return rows_[r]; }

  std::size_t missing_count() const;

  Table select_rows(std::span<const std::size_t> rows) const;
  Table drop_column(std::string_view column) const;

  bool operator==(const Table&) const = default;

 private:
  std::string name_;
  Schema columns_;
  std::vector<std::vector<Cell>> rows_;
};

bool cell_matches_kind(const Cell& cell, ColumnKind kind);
std::string_view kind_name(ColumnKind kind);

/// Typed accessors; return nullopt for missing cells, throw DataError on a
/// kind mismatch.
std::optional<bool> cell_bool(const Cell& cell);
std::optional<std::int64_t> cell_int(const Cell& cell);
/// Accepts integer or floating cells.
std::optional<double> cell_number(const Cell& cell);
std::optional<std::string> cell_string(const Cell& cell);
std::optional<Date> cell_date(const Cell& cell);
std::optional<TimeOfDay> cell_time(const Cell& cell);

Date make_date(int year, unsigned month, unsigned day);
std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view text);
std::string format_time(TimeOfDay t);
std::optional<TimeOfDay> parse_time(std::string_view text);

/// Canonical text form of a cell as written to CSV (empty for missing).
std::string format_cell(const Cell& cell);
/// Parses CSV text for a column kind; empty text is a missing cell.
/// Returns nullopt when the text does not conform to the kind.
std::optional<Cell> parse_cell(std::string_view text, ColumnKind kind);

// CSV: comma-delimited, mandatory header row, RFC-4180 quoting, missing cells
// as empty fields.
Table parse_csv(std::string_view text, std::string table_name, const Schema& schema);
Table load_csv(const std::filesystem::path& path, const Schema& schema);
std::string to_csv(const Table& table);
void write_csv(const Table& table, const std::filesystem::path& path);

}  // namespace fairpsy

#endif  // FAIRPSY_TABLE_HPP
