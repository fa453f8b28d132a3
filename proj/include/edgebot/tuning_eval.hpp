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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edgebot/dataset.hpp"
#include "edgebot/model.hpp"

namespace edgebot {

// ---------------------------------------------------------------------------
// Metrics

/// Attack is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(std::span<const std::uint8_t> predicted,
                          std::span<const std::uint8_t> actual);

/// Each ratio is nullopt when its denominator is zero.
struct Metrics {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> specificity;
  std::optional<double> fnr;
  std::optional<double> fpr;
};

/// Throws EmptyMatrix when the matrix counts nothing.
Metrics metrics(const ConfusionMatrix& cm);

/// Share of Attack rows predicted Attack (test-set recall). Throws NoPositiveRows.
double detection_probability(std::span<const std::uint8_t> predicted,
                             std::span<const std::uint8_t> actual);
double detection_probability(const Model& model, const Dataset& test);

// ---------------------------------------------------------------------------
// Noise

struct NoiseSpec {
  double sigma = 0.1;               // fraction of each feature's training std
  std::vector<double> train_std;    // per column; bit columns ignored
  std::uint64_t seed = 0;
};

/// Population std of every numeric column of the training split.
NoiseSpec noise_spec(const Dataset& train, double sigma, std::uint64_t seed);

/// Adds N(0, (sigma * std_j)^2) to numeric columns; bit columns untouched.
Dataset inject_noise(const Dataset& data, const NoiseSpec& spec);

// ---------------------------------------------------------------------------
// Reports

struct EvalReport {
  std::string model;                // model kind
  std::string model_id;             // artifact checksum, when known
  std::string split;                // "validation", "test", ...
  std::string dataset;              // fingerprint hex
  std::size_t rows = 0;
  std::optional<ConfusionMatrix> confusion;
  Metrics metrics;
  std::optional<double> detection_probability;
  std::optional<NoiseSpec> noise;
  // Populated by benchmark() only, so other reports stay byte-deterministic.
  std::optional<double> train_seconds;
  std::optional<double> infer_seconds;
  std::optional<std::size_t> model_bytes;
  std::optional<std::string> host;
};

EvalReport evaluate(const Model& model, const Dataset& data, const std::string& split);

nlohmann::json to_json(const EvalReport& report);
/// Canonical (sorted-key) JSON text with a trailing newline.
std::string report_json(const EvalReport& report);
/// Aligned plain-text table, one row per report.
std::string format_table(const std::vector<EvalReport>& reports);

std::string host_identity();

// ---------------------------------------------------------------------------
// Random search

struct ChoiceDomain {
  std::vector<std::string> values;
};
struct RangeDomain {
  double lo = 0.0;
  double hi = 1.0;
  bool integer = false;
};
using Domain = std::variant<ChoiceDomain, RangeDomain>;

struct ParamSpace {
  ModelKind kind = ModelKind::Rf;
  std::map<std::string, Domain> fields;
  int n_iter = 10;
  std::uint64_t seed = 0;

  /// Pool centred on the reference configuration.
  static ParamSpace around_reference(ModelKind kind, int n_iter, std::uint64_t seed);

  /// Throws InvalidConfig when a field is foreign to the kind, a candidate
  /// is invalid on its own, or n_iter < 1.
  void validate() const;
};

ParamSpace param_space_from_json(const nlohmann::json& j);

/// Draws one configuration; fields are drawn in name order.
HyperParams draw(const ParamSpace& space, Rng& rng);

enum class SearchMetric { Accuracy, F1 };

struct Trial {
  std::size_t index = 0;
  HyperParams params;
  std::optional<double> score;
  std::string error;
};

struct SearchResult {
  HyperParams best;
  std::size_t best_index = 0;
  double best_score = 0.0;
  std::vector<Trial> trials;
};

/// Trains each draw on train, scores on validation, keeps the argmax (earlier
/// draw wins ties). A failing trial is logged and skipped. Throws
/// InvalidConfig when every trial fails.
SearchResult random_search(const ParamSpace& space, const Dataset& train,
                           const Dataset& validation, const TrainOptions& options,
                           SearchMetric metric = SearchMetric::Accuracy);

void write_trial_log(std::ostream& out, const std::vector<Trial>& trials);

// ---------------------------------------------------------------------------
// Benchmark

/// Trains `repeats` times and times batch inference over the whole test set
/// as often; reports median timings, test metrics and serialized size.
EvalReport benchmark(const HyperParams& hp, const Dataset& train, const Dataset& test,
                     const TrainOptions& options, int repeats = 3);

}  // namespace edgebot
