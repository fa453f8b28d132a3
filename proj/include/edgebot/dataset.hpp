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
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace edgebot {

enum class FeatureKind : std::uint8_t { Numeric = 0, Bit = 1 };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view s);

/// Row-major n x p feature matrix with one binary label per row
/// (0 = Benign, 1 = Attack).
struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> feature_kinds;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;

  std::size_t rows() const { return labels.size(); }
  std::size_t cols() const { return feature_names.size(); }

  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  double& at(std::size_t row, std::size_t col) { return values[row * cols() + col]; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  std::vector<double> column(std::size_t j) const;

  /// Throws InvalidConfig when shape, finiteness or name uniqueness fail.
  void validate() const;

  Dataset select_rows(std::span<const std::size_t> indices) const;
  /// Projection onto the named columns, in the order given.
  Dataset select_columns(const std::vector<std::string>& names) const;
  std::size_t feature_index(std::string_view name) const;

  std::size_t count_label(std::uint8_t label) const;
};

/// Stable 64-bit fingerprint of names, values and labels.
std::uint64_t fingerprint(const Dataset& data);

/// CSV with one column per feature followed by a "label" column.
void write_dataset_csv(std::ostream& out, const Dataset& data);
/// Kinds default to Numeric; the sidecar supplies the real ones.
Dataset read_dataset_csv(std::istream& in, const std::string& source = "<dataset>");

}  // namespace edgebot
