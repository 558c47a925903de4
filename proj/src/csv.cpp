#include "agecohort/csv.hpp"

#include <algorithm>

#include "agecohort/error.hpp"

namespace agecohort::csv {

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_row(const Row& row) {
  std::string line;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) line += ',';
    line += escape(row[i]);
  }
  return line;
}

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool at_line_start = true;
  bool row_has_content = false;
  std::size_t i = 0;

  auto end_row = [&] {
    if (row_has_content) {
      row.push_back(std::move(field));
      rows.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    row_has_content = false;
    at_line_start = true;
  };

  while (i < text.size()) {
    const char c = text[i];
    if (at_line_start && !in_quotes && c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      ++i;
      continue;
    }
    at_line_start = false;
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
      row_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      field += c;
      row_has_content = true;
    }
    ++i;
  }
  if (in_quotes) {
    throw Error(ErrorCode::ParseError, "unterminated quoted CSV field");
  }
  end_row();
  return rows;
}

Table Table::from_text(std::string_view text) {
  auto rows = parse(text);
  Table t;
  if (rows.empty()) {
    return t;
  }
  t.header_ = std::move(rows.front());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != t.header_.size()) {
      throw Error(ErrorCode::ParseError, "CSV row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                             " fields, header has " + std::to_string(t.header_.size()));
    }
    t.rows_.push_back(std::move(rows[r]));
  }
  return t;
}

std::size_t Table::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) {
    throw Error(ErrorCode::ParseError, "missing CSV column: " + std::string(name));
  }
  return static_cast<std::size_t>(it - header_.begin());
}

bool Table::has_column(std::string_view name) const {
  return std::find(header_.begin(), header_.end(), name) != header_.end();
}

}  // namespace agecohort::csv
