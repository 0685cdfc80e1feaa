#include "fairpsy/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fairpsy {

namespace {

template <typename T>
std::optional<T> typed(const Cell& cell, std::string_view expected) {
  if (is_missing(cell)) return std::nullopt;
  if (const T* v = std::get_if<T>(&cell)) return *v;
  throw DataError("cell is not of kind " + std::string(expected));
}

bool parse_fixed_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

Table::Table(std::string name, Schema columns) : name_(std::move(name)), columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    for (std::size_t j = i + 1; j < columns_.size(); ++j)
      if (columns_[i].name == columns_[j].name)
        throw DataError("table '" + name_ + "': duplicate column '" + columns_[i].name + "'");
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw DataError("table '" + name_ + "': row has " + std::to_string(row.size()) + " cells, expected " +
                    std::to_string(columns_.size()));
  for (std::size_t c = 0; c < row.size(); ++c)
    if (!cell_matches_kind(row[c], columns_[c].kind))
      throw DataError("table '" + name_ + "': cell in column '" + columns_[c].name + "' is not of kind " +
                      std::string(kind_name(columns_[c].kind)));
  rows_.push_back(std::move(row));
}

std::optional<std::size_t> Table::find_column(std::string_view column) const {
  for (std::size_t i = 0; i < columns_.size(); ++i)
    if (columns_[i].name == column) return i;
  return std::nullopt;
}

std::size_t Table::column_index(std::string_view column) const {
  if (auto idx = find_column(column)) return *idx;
  throw DataError("table '" + name_ + "' has no column '" + std::string(column) + "'");
}

std::size_t Table::missing_count() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += static_cast<std::size_t>(std::count_if(row.begin(), row.end(), is_missing));
  return n;
}

Table Table::select_rows(std::span<const std::size_t> rows) const {
  Table out(name_, columns_);
  out.rows_.reserve(rows.size());
  for (std::size_t r : rows) out.rows_.push_back(rows_.at(r));
  return out;
}

Table Table::drop_column(std::string_view column) const {
  const std::size_t idx = column_index(column);
  Schema cols = columns_;
  cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(idx));
  Table out(name_, std::move(cols));
  out.rows_.reserve(rows_.size());
  for (const auto& row : rows_) {
    auto copy = row;
    copy.erase(copy.begin() + static_cast<std::ptrdiff_t>(idx));
    out.rows_.push_back(std::move(copy));
  }
  return out;
}

bool cell_matches_kind(const Cell& cell, ColumnKind kind) {
  if (is_missing(cell)) return true;
  switch (kind) {
    case ColumnKind::identifier:
    case ColumnKind::categorical:
      return std::holds_alternative<std::string>(cell) && !std::get<std::string>(cell).empty();
    case ColumnKind::boolean:
      return std::holds_alternative<bool>(cell);
    case ColumnKind::integer:
      return std::holds_alternative<std::int64_t>(cell);
    case ColumnKind::floating:
      return std::holds_alternative<double>(cell) && std::isfinite(std::get<double>(cell));
    case ColumnKind::date:
      return std::holds_alternative<Date>(cell);
    case ColumnKind::time:
      return std::holds_alternative<TimeOfDay>(cell);
  }
  return false;
}

std::string_view kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::identifier: return "identifier";
    case ColumnKind::boolean: return "boolean";
    case ColumnKind::integer: return "integer";
    case ColumnKind::floating: return "float";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::date: return "date";
    case ColumnKind::time: return "time";
  }
  return "unknown";
}

std::optional<bool> cell_bool(const Cell& cell) { return typed<bool>(cell, "boolean"); }
std::optional<std::int64_t> cell_int(const Cell& cell) { return typed<std::int64_t>(cell, "integer"); }
std::optional<std::string> cell_string(const Cell& cell) { return typed<std::string>(cell, "string"); }
std::optional<Date> cell_date(const Cell& cell) { return typed<Date>(cell, "date"); }
std::optional<TimeOfDay> cell_time(const Cell& cell) { return typed<TimeOfDay>(cell, "time"); }

std::optional<double> cell_number(const Cell& cell) {
  if (is_missing(cell)) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  throw DataError("cell is not numeric");
}

Date make_date(int year, unsigned month, unsigned day) {
  return Date{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_fixed_int(text.substr(0, 4), y) || !parse_fixed_int(text.substr(5, 2), m) ||
      !parse_fixed_int(text.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y} / std::chrono::month{static_cast<unsigned>(m)} /
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string format_time(TimeOfDay t) {
  const auto s = t.count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(s / 3600),
                static_cast<long long>((s / 60) % 60), static_cast<long long>(s % 60));
  return buf;
}

std::optional<TimeOfDay> parse_time(std::string_view text) {
  if (text.size() != 8 || text[2] != ':' || text[5] != ':') return std::nullopt;
  int h = 0, m = 0, s = 0;
  if (!parse_fixed_int(text.substr(0, 2), h) || !parse_fixed_int(text.substr(3, 2), m) ||
      !parse_fixed_int(text.substr(6, 2), s))
    return std::nullopt;
  if (h > 23 || m > 59 || s > 59) return std::nullopt;
  return TimeOfDay{h * 3600 + m * 60 + s};
}

std::string format_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
      return std::string(buf, ptr);
    }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(Date d) const { return format_date(d); }
    std::string operator()(TimeOfDay t) const { return format_time(t); }
  };
  return std::visit(Visitor{}, cell);
}

std::optional<Cell> parse_cell(std::string_view text, ColumnKind kind) {
  if (text.empty()) return Cell{};
  switch (kind) {
    case ColumnKind::identifier:
    case ColumnKind::categorical:
      return Cell{std::string(text)};
    case ColumnKind::boolean:
      if (text == "true") return Cell{true};
      if (text == "false") return Cell{false};
      return std::nullopt;
    case ColumnKind::integer: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
      return Cell{v};
    }
    case ColumnKind::floating: {
      double v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
      return Cell{v};
    }
    case ColumnKind::date:
      if (auto d = parse_date(text)) return Cell{*d};
      return std::nullopt;
    case ColumnKind::time:
      if (auto t = parse_time(text)) return Cell{*t};
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace fairpsy
