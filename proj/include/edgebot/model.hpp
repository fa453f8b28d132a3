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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgebot/boosting.hpp"
#include "edgebot/dataset.hpp"
#include "edgebot/forest.hpp"

namespace edgebot {

enum class ModelKind : std::uint8_t { Rf = 0, Xgb = 1, Lgbm = 2 };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);

/// Union of the tunable fields. Only fields meaningful for `kind` may be set;
/// unset fields fall back to the trainer's library defaults.
struct HyperParams {
  ModelKind kind = ModelKind::Rf;
  std::optional<int> max_depth;
  std::optional<int> n_estimators;
  std::optional<double> min_samples_split;  // rf
  std::optional<double> min_samples_leaf;   // rf
  std::optional<std::string> max_features;  // rf: "sqrt" or "all"
  std::optional<double> min_child_samples;  // lgbm
  std::optional<double> subsample;          // xgb, lgbm
  std::optional<double> learning_rate;      // xgb, lgbm
  std::optional<int> num_leaves;            // lgbm
  std::optional<double> reg_alpha;          // lgbm
  std::optional<double> reg_lambda;         // lgbm
  std::optional<double> colsample_bytree;   // xgb, lgbm
  std::optional<double> gamma;              // xgb

  /// The reference configuration for each model kind.
  static HyperParams reference(ModelKind kind);

  /// Throws InvalidParams for fields foreign to the kind or out of range.
  void validate() const;

  bool operator==(const HyperParams&) const = default;
};

nlohmann::json to_json(const HyperParams& hp);
HyperParams hyper_params_from_json(const nlohmann::json& j);
/// Applies "field=value" overrides (from config files or flags).
void set_field(HyperParams& hp, std::string_view field, std::string_view value);

struct TrainOptions {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  // Extra boosting knobs not present in the reference table.
  std::optional<TreeMethod> tree_method;
  std::optional<GossConfig> goss;
  std::optional<bool> use_efb;
};

ForestParams forest_params(const HyperParams& hp, const TrainOptions& options);
BoostParams boost_params(const HyperParams& hp, const TrainOptions& options);

/// A trained classifier of any kind behind one prediction interface.
struct Model {
  ModelKind kind = ModelKind::Rf;
  HyperParams hyper;
  std::variant<ForestModel, GbdtModel> impl;

  const std::vector<std::string>& feature_names() const;
  std::uint8_t predict(std::span<const double> x) const;
  /// Attack probability (boosting) or Attack vote fraction (forest).
  double score(std::span<const double> x) const;
  std::vector<std::uint8_t> predict_batch(const Dataset& data) const;
};

Model train_model(const Dataset& train, const HyperParams& hp, const TrainOptions& options);

}  // namespace edgebot
