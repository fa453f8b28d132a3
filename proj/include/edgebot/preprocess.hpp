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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgebot/dataset.hpp"
#include "edgebot/flow.hpp"

namespace edgebot {

// ---------------------------------------------------------------------------
// Cleaning

struct CleanReport {
  std::size_t input = 0;
  std::size_t duplicates_removed = 0;
  std::size_t inconsistent_dropped = 0;
  std::size_t output = 0;
};

struct CleanResult {
  std::vector<FlowRecord> records;
  CleanReport report;
};

/// Drops exact duplicates (13 features + label, first occurrence kept) and
/// rows whose payload bytes exceed their IP-layer bytes. Missing optional
/// numerics stay missing here; encoding imputes them as 0 plus an indicator.
CleanResult clean(const std::vector<FlowRecord>& records);

// ---------------------------------------------------------------------------
// Categorical encoding

/// Positional binary code per category. Code 0 is reserved for missing and
/// unseen values; known categories take codes 1..|vocab| in first-seen order.
struct CategoricalVocab {
  std::string feature;
  std::vector<std::string> categories;
  int bits = 1;

  std::uint32_t code(const std::optional<std::string>& value) const;
};

struct EncodingSpec {
  // proto, service, conn_state, history, in that order.
  std::vector<CategoricalVocab> vocabs;

  const CategoricalVocab& vocab(std::string_view feature) const;
  std::vector<std::string> feature_names() const;
  std::vector<FeatureKind> feature_kinds() const;
  std::size_t width() const;

  /// Writes one encoded row (width() values).
  void encode(const FlowRecord& record, std::span<double> out) const;
};

int bit_width_for(std::size_t vocab_size);

EncodingSpec fit_encoding(std::span<const FlowRecord> train);
/// Numeric features, missingness indicators and categorical bit columns.
Dataset apply_encoding(const EncodingSpec& spec, std::span<const FlowRecord> records);

// ---------------------------------------------------------------------------
// Scaling

struct ScalerParams {
  static constexpr double kStdFloor = 1e-12;
  std::vector<std::string> feature_names;
  // Entries for bit columns are mean 0, std 1 and never applied.
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> applies;

  double forward(std::size_t j, double x) const {
    return applies[j] ? (x - mean[j]) / stddev[j] : x;
  }
  double inverse(std::size_t j, double z) const {
    return applies[j] ? z * stddev[j] + mean[j] : z;
  }
};

ScalerParams fit_scaler(const Dataset& train);
Dataset apply_scaler(const ScalerParams& params, const Dataset& data);
Dataset invert_scaler(const ScalerParams& params, const Dataset& data);

// ---------------------------------------------------------------------------
// Splitting

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Stratified 64/16/20 split; deterministic under the seed.
SplitIndices split_indices(std::span<const std::uint8_t> labels, std::uint64_t seed);

struct DataSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
  std::uint64_t seed = 0;
  SplitIndices indices;
};

DataSplit split(const Dataset& data, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Whole-pipeline fit and standalone inference transform

/// Raw flow -> encoded -> standardized -> projected onto selected features.
struct FeaturePipeline {
  EncodingSpec encoding;
  ScalerParams scaler;
  std::vector<std::string> selected;

  std::vector<std::string> full_feature_names() const { return encoding.feature_names(); }
  std::vector<std::size_t> selected_indices() const;

  /// scratch must hold encoding.width() values; out holds selected.size().
  void transform(const FlowRecord& record, std::span<double> scratch,
                 std::span<const std::size_t> selected_idx, std::span<double> out) const;
};

struct PreparedData {
  CleanReport clean_report;
  EncodingSpec encoding;
  ScalerParams scaler;
  DataSplit split;
};

/// clean -> split (on records) -> fit encoding and scaler on train only.
PreparedData prepare(const std::vector<FlowRecord>& records, std::uint64_t seed,
                     bool already_clean = false);

// JSON sidecar pieces.
nlohmann::json to_json(const EncodingSpec& spec);
EncodingSpec encoding_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScalerParams& params);
ScalerParams scaler_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CleanReport& report);

struct Sidecar {
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> feature_kinds;
  std::optional<EncodingSpec> encoding;
  std::optional<ScalerParams> scaler;
  std::vector<std::string> selected;  // empty means all features
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const Sidecar& sidecar);
Sidecar sidecar_from_json(const nlohmann::json& j);

/// Applies sidecar feature kinds to a dataset read from CSV.
void apply_sidecar_kinds(Dataset& data, const Sidecar& sidecar);

}  // namespace edgebot
