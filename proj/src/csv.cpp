// Copyright 2026 The edgebot Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "edgebot/csv.hpp"

#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "edgebot/error.hpp"

namespace edgebot {

std::size_t RawTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return npos;
}

namespace {

// Reads one logical record. Returns false at end of input with nothing read.
bool read_record(std::istream& in, std::vector<std::string>& cells,
                 std::size_t& line, const std::string& source) {
  cells.clear();
  int c = in.get();
  if (c == EOF) return false;
  ++line;
  const std::size_t start_line = line;
  std::string cell;
  bool quoted = false;
  bool after_quote = false;
  for (;; c = in.get()) {
    if (quoted) {
      if (c == EOF) {
        throw Error(ErrorKind::UnbalancedQuote,
                    source + ": unterminated quote starting on line " +
                        std::to_string(start_line));
      }
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          cell.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == EOF || c == '\n') {
      if (!cell.empty() && cell.back() == '\r' && !after_quote) cell.pop_back();
      cells.push_back(std::move(cell));
      return true;
    }
    if (c == '\r' && (in.peek() == '\n' || in.peek() == EOF)) continue;
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
      after_quote = false;
    } else if (c == '"' && cell.empty() && !after_quote) {
      quoted = true;
    } else if (after_quote) {
      throw Error(ErrorKind::UnbalancedQuote,
                  source + ": text after closing quote on line " + std::to_string(line));
    } else {
      cell.push_back(static_cast<char>(c));
    }
  }
}

}  // namespace

RawTable parse_csv(std::istream& in, bool has_header, std::string source) {
  RawTable table;
  table.source = std::move(source);
  std::vector<std::string> cells;
  std::size_t line = 0;
  bool first = true;
  while (true) {
    const std::size_t before = line;
    if (!read_record(in, cells, line, table.source)) break;
    const std::size_t row_line = before + 1;
    if (cells.size() == 1 && cells[0].empty()) continue;  // blank line
    if (first) {
      first = false;
      if (has_header) {
        table.columns = cells;
        continue;
      }
      for (std::size_t i = 0; i < cells.size(); ++i) {
        table.columns.push_back("c" + std::to_string(i));
      }
    }
    if (cells.size() != table.columns.size()) {
      throw Error(ErrorKind::FieldCountMismatch,
                  table.source + ": line " + std::to_string(row_line) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(table.columns.size()));
    }
    table.rows.push_back(cells);
    table.line_numbers.push_back(row_line);
  }
  return table;
}

RawTable parse_csv(std::string_view text, bool has_header, std::string source) {
  std::istringstream in{std::string(text)};
  return parse_csv(in, has_header, std::move(source));
}

std::string csv_quote(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << csv_quote(cells[i]);
  }
  out << '\n';
}

}  // namespace edgebot
