#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace agecohort::csv {

using Row = std::vector<std::string>;

// RFC 4180 style: fields containing comma, quote or newline are quoted.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

// Parses a whole document. Lines starting with '#' are comments and skipped.
std::vector<Row> parse(std::string_view text);

// Header-aware view over parsed rows.
class Table {
 public:
  static Table from_text(std::string_view text);

  const Row& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }
  // Column index for a header name; throws ParseError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

 private:
  Row header_;
  std::vector<Row> rows_;
};

}  // namespace agecohort::csv
