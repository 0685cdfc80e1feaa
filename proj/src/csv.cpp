#include "fairpsy/table.hpp"

#include <fstream>
#include <sstream>

namespace fairpsy {

namespace {

// Splits RFC-4180 text into records of raw fields. Tracks the 1-based line
// on which each record starts for diagnostics.
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<Record> split_records(std::string_view text) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current = Record{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw DataError("line " + std::to_string(line) + ": stray quote inside unquoted field");
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field");
  if (field_started || !field.empty() || !current.fields.empty()) end_record();
  return records;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Table parse_csv(std::string_view text, std::string table_name, const Schema& schema) {
  const auto records = split_records(text);
  if (records.empty()) throw DataError(table_name + ": missing header row");

  const auto& header = records.front().fields;
  bool header_ok = header.size() == schema.size();
  for (std::size_t c = 0; header_ok && c < header.size(); ++c) header_ok = header[c] == schema[c].name;
  if (!header_ok) {
    std::string expected;
    for (const auto& col : schema) expected += (expected.empty() ? "" : ",") + col.name;
    throw DataError(table_name + ": header mismatch, expected '" + expected + "'");
  }

  Table table(std::move(table_name), schema);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != schema.size())
      throw DataError(table.name() + ": line " + std::to_string(rec.line) + " has " +
                      std::to_string(rec.fields.size()) + " fields, expected " + std::to_string(schema.size()));
    std::vector<Cell> row;
    row.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      auto cell = parse_cell(rec.fields[c], schema[c].kind);
      if (!cell)
        throw DataError(table.name() + ": row " + std::to_string(r) + ", column '" + schema[c].name +
                        "': cannot parse '" + rec.fields[c] + "' as " + std::string(kind_name(schema[c].kind)));
      row.push_back(std::move(*cell));
    }
    table.add_row(std::move(row));
  }
  return table;
}

Table load_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file not found: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.stem().string(), schema);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (c) out.push_back(',');
    out += quote_field(table.columns()[c].name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
      if (c) out.push_back(',');
      out += quote_field(format_cell(table.at(r, c)));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(table);
}

}  // namespace fairpsy
