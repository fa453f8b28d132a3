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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "edgebot/dataset.hpp"
#include "edgebot/rng.hpp"
#include "edgebot/tree.hpp"

namespace edgebot {

struct BootstrapSample {
  std::vector<std::size_t> indices;  // n draws, with repeats, sorted
  std::vector<std::size_t> oob;      // rows never drawn, ascending
};

BootstrapSample bootstrap_sample(std::size_t n, Rng& rng);

enum class MaxFeatures : std::uint8_t { Sqrt, All };

struct ForestParams {
  int n_estimators = 100;
  int max_depth = 6;
  double min_samples_split = 10;
  double min_samples_leaf = 4;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency; never changes the model
};

void validate(const ForestParams& params);

/// ceil(sqrt(p)) computed in integers.
std::size_t sqrt_features(std::size_t p);

struct ForestVote {
  std::uint8_t label = 0;
  std::vector<double> fractions;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t classes = 2;
  std::size_t features_per_split = 0;
  ForestParams params;
  std::vector<std::string> feature_names;

  bool trained() const { return !trees.empty(); }

  /// Hard majority vote over per-tree leaf-majority classes. Ties on either
  /// level go to the lower class index.
  ForestVote predict_class(std::span<const double> x) const;
  /// Mean of numeric leaf payloads.
  double predict_mean(std::span<const double> x) const;
  /// Attack vote fraction.
  double score(std::span<const double> x) const;
};

/// Leaf-majority class of a class-count payload (lower index on ties).
std::uint8_t majority(std::span<const double> counts);

/// Called with (tree index, sampled features) at every split attempt.
using SplitObserver = std::function<void(std::size_t, const std::vector<std::size_t>&)>;

ForestModel train_forest(const Dataset& train, const ForestParams& params,
                         const SplitObserver& observer = {});

}  // namespace edgebot
