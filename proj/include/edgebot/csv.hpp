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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace edgebot {

/// A parsed delimited table. Every row has exactly columns.size() cells.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string source;
  // 1-based physical line on which each row starts.
  std::vector<std::size_t> line_numbers;

  std::size_t column_index(std::string_view name) const;  // npos if absent
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Comma-separated values with double-quote quoting and "" escapes. Quoted
/// cells may span lines. Without a header the columns are named c0, c1, ...
RawTable parse_csv(std::istream& in, bool has_header, std::string source = "<csv>");
RawTable parse_csv(std::string_view text, bool has_header, std::string source = "<csv>");

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);
std::string csv_quote(std::string_view cell);

}  // namespace edgebot
