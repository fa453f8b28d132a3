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

#include "edgebot/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "edgebot/checksum.hpp"
#include "edgebot/csv.hpp"
#include "edgebot/error.hpp"
#include "edgebot/numfmt.hpp"

namespace edgebot {

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::Bit ? "bit" : "numeric";
}

FeatureKind feature_kind_from_string(std::string_view s) {
  if (s == "bit") return FeatureKind::Bit;
  if (s == "numeric") return FeatureKind::Numeric;
  throw Error(ErrorKind::InvalidConfig, "unknown feature kind '" + std::string(s) + "'");
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
  return out;
}

void Dataset::validate() const {
  if (feature_kinds.size() != feature_names.size()) {
    throw Error(ErrorKind::InvalidConfig, "feature kinds and names differ in length");
  }
  if (values.size() != rows() * cols()) {
    throw Error(ErrorKind::InvalidConfig, "value matrix does not hold n*p entries");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : feature_names) {
    if (!seen.insert(n).second) {
      throw Error(ErrorKind::InvalidConfig, "duplicate feature name '" + n + "'");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidConfig, "non-finite feature value");
  }
  for (auto l : labels) {
    if (l > 1) throw Error(ErrorKind::InvalidConfig, "label outside {0, 1}");
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.feature_kinds = feature_kinds;
  out.values.reserve(indices.size() * cols());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    auto r = row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::size_t Dataset::feature_index(std::string_view name) const {
  for (std::size_t j = 0; j < feature_names.size(); ++j) {
    if (feature_names[j] == name) return j;
  }
  throw Error(ErrorKind::FeatureIndexOutOfRange, "no feature named '" + std::string(name) + "'");
}

Dataset Dataset::select_columns(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(feature_index(n));
  Dataset out;
  out.feature_names = names;
  for (std::size_t j : idx) out.feature_kinds.push_back(feature_kinds[j]);
  out.labels = labels;
  out.values.reserve(rows() * idx.size());
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t j : idx) out.values.push_back(at(i, j));
  }
  return out;
}

std::size_t Dataset::count_label(std::uint8_t label) const {
  std::size_t c = 0;
  for (auto l : labels) c += (l == label);
  return c;
}

std::uint64_t fingerprint(const Dataset& data) {
  Fnv1a64 h;
  for (const auto& n : data.feature_names) {
    h.update(n);
    h.update(std::string_view("\0", 1));
  }
  for (double v : data.values) h.update_pod(v);
  for (auto l : data.labels) h.update_pod(l);
  return h.digest();
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> header = data.feature_names;
  header.push_back("label");
  write_csv_row(out, header);
  std::string line;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < data.cols(); ++j) {
      line += format_double(data.at(i, j));
      line += ',';
    }
    line += data.labels[i] ? '1' : '0';
    line += '\n';
    out << line;
  }
}

Dataset read_dataset_csv(std::istream& in, const std::string& source) {
  RawTable table = parse_csv(in, true, source);
  const std::size_t label_col = table.column_index("label");
  if (label_col == RawTable::npos) {
    throw Error(ErrorKind::MissingHeader, source + ": dataset CSV lacks a 'label' column");
  }
  Dataset data;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c == label_col) continue;
    data.feature_names.push_back(table.columns[c]);
    data.feature_kinds.push_back(FeatureKind::Numeric);
  }
  data.values.reserve(table.rows.size() * data.cols());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string& cell = row[c];
      double v = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty()) {
        throw Error(ErrorKind::UnparsableValue,
                    source + ": line " + std::to_string(table.line_numbers[r]) +
                        ", column " + table.columns[c] + ": '" + cell + "'");
      }
      if (c == label_col) {
        if (v != 0.0 && v != 1.0) {
          throw Error(ErrorKind::UnparsableValue,
                      source + ": line " + std::to_string(table.line_numbers[r]) +
                          ": label must be 0 or 1");
        }
        data.labels.push_back(static_cast<std::uint8_t>(v));
      } else {
        data.values.push_back(v);
      }
    }
  }
  return data;
}

}  // namespace edgebot
