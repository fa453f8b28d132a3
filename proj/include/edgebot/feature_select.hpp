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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgebot/dataset.hpp"
#include "edgebot/tree.hpp"

namespace edgebot {

struct ForestModel;
struct GbdtModel;

/// Average (fractional) ranks, 1-based.
std::vector<double> rank(std::span<const double> values);

/// Rank correlation with population moments. Throws LengthMismatch,
/// EmptyInput (fewer than two values) or ConstantInput.
double spearman(std::span<const double> x, std::span<const double> y);

/// Same, over precomputed ranks.
double spearman_from_ranks(std::span<const double> rx, std::span<const double> ry);

struct CorrelationMatrix {
  std::vector<std::string> names;  // features, then "label"
  // Row-major; nullopt where either column is constant.
  std::vector<std::optional<double>> values;
  std::vector<bool> constant;

  std::size_t size() const { return names.size(); }
  std::optional<double> at(std::size_t i, std::size_t j) const { return values[i * size() + j]; }
};

/// Pairwise coefficients over every feature column and the label column.
CorrelationMatrix correlation_matrix(const Dataset& data);

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);
/// Heatmap-ready long format: feature_a,feature_b,r.
void write_correlation_long(std::ostream& out, const CorrelationMatrix& m);
nlohmann::json to_json(const CorrelationMatrix& m);

enum class ImportanceMode { Gain, Cover, Weight };

std::string_view to_string(ImportanceMode mode);
ImportanceMode importance_mode_from_string(std::string_view s);

struct ImportanceReport {
  std::string model;  // producing model identity
  std::vector<std::string> feature_names;
  std::vector<double> gain;
  std::vector<double> cover;
  std::vector<double> weight;  // split-use counts

  const std::vector<double>& scores(ImportanceMode mode) const;
  /// True when the model has no splits at all.
  bool empty() const;
};

ImportanceReport tree_importance(std::span<const DecisionTree> trees,
                                 const std::vector<std::string>& feature_names,
                                 std::string model);
ImportanceReport model_importance(const GbdtModel& model, std::string model_id = "gbdt");
ImportanceReport model_importance(const ForestModel& model, std::string model_id = "rf");

/// Features with positive score, in original column order. Throws AllZero.
std::vector<std::string> select_nonzero(const ImportanceReport& report,
                                        ImportanceMode mode = ImportanceMode::Weight);

void write_importance_csv(std::ostream& out, const ImportanceReport& report);
nlohmann::json to_json(const ImportanceReport& report);

}  // namespace edgebot
