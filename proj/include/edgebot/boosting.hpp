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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgebot/dataset.hpp"
#include "edgebot/rng.hpp"
#include "edgebot/tree.hpp"

namespace edgebot {

enum class BoostMode : std::uint8_t { Xgb = 0, Lgbm = 1 };
enum class TreeMethod : std::uint8_t { Hist = 0, Exact = 1 };

struct GradHess {
  double g = 0.0;
  double h = 0.0;
};

/// Cross-entropy derivatives with respect to the margin at p = sigmoid(margin).
GradHess logloss_grad_hess(double p, double y);

double sigmoid(double margin);

// ---------------------------------------------------------------------------
// GOSS

struct GossConfig {
  double a = 0.2;  // top-gradient fraction
  double b = 0.1;  // sampled fraction of the rest
  bool enabled = true;

  double amplification() const { return (1.0 - a) / b; }
  void validate() const;
};

struct GossSample {
  std::vector<std::size_t> rows;  // ascending
  std::vector<double> weights;    // aligned with rows
};

/// Keeps the floor(a*n) largest |g| (lower index wins ties) at weight 1 and
/// floor(b*n) uniform draws from the rest at weight (1-a)/b. candidates, when
/// given, restricts selection to that pool (n = pool size).
GossSample goss_sample(std::span<const double> grad, const GossConfig& config, Rng& rng,
                       std::span<const std::size_t> candidates = {});

// ---------------------------------------------------------------------------
// EFB

/// Greedy bundling over binned columns. A feature is "nonzero" on a row when
/// its bin differs from its zero bin; features with no isolated zero bin stay
/// alone. Features are visited by descending nonzero count and join the first
/// bundle whose conflict total stays within budget.
FeatureBundle efb_bundle(const BinnedMatrix& x, std::size_t conflict_budget = 0);

/// Recovers (feature, bin) for every member of bundle b on one row from the
/// bundle column alone. Members not encoded there decode to their zero bin.
std::vector<std::uint32_t> efb_decode(const BinnedMatrix& x, std::size_t bundle,
                                      std::size_t row);

// ---------------------------------------------------------------------------
// Model

struct BoostParams {
  BoostMode mode = BoostMode::Xgb;
  TreeMethod tree_method = TreeMethod::Hist;
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 6;
  std::size_t num_leaves = 0;         // leaf-wise cap, lgbm only
  double min_child_samples = 1;       // rows per leaf
  double min_child_weight = 1.0;      // hessian per leaf
  double subsample = 1.0;
  double colsample_bytree = 1.0;
  double gamma = 0.0;
  double reg_alpha = 0.0;
  double reg_lambda = 1.0;
  GossConfig goss;                    // lgbm only
  bool use_efb = true;                // lgbm only
  std::size_t efb_conflict_budget = 0;
  std::size_t max_bins = kMaxBins;
  std::uint64_t seed = 0;

  BoostObjective objective() const {
    return {reg_lambda, gamma, reg_alpha, min_child_weight};
  }
};

void validate(const BoostParams& params);

struct GbdtModel {
  BoostMode mode = BoostMode::Xgb;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<DecisionTree> trees;
  BoostParams params;
  std::vector<std::string> feature_names;
  std::optional<FeatureBundle> bundles;
  bool trained = false;

  /// base_score + eta * sum_m f_m(x); the tree sum is formed before scaling.
  double predict_margin(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;
  /// Attack (1) when proba >= 0.5.
  std::uint8_t predict_class(std::span<const double> x) const;
};

/// Round-by-round trainer. Holds the binned or sorted data and the running
/// per-row tree sums so margins are always base + eta * sums.
class BoostTrainer {
 public:
  BoostTrainer(const Dataset& train, const BoostParams& params);
  ~BoostTrainer();
  BoostTrainer(const BoostTrainer&) = delete;
  BoostTrainer& operator=(const BoostTrainer&) = delete;

  /// Grows one tree on the current gradients and folds it into the margins.
  const DecisionTree& round();
  void run();

  const GbdtModel& model() const { return model_; }
  GbdtModel take_model();
  std::vector<double> margins() const;
  double training_logloss() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  GbdtModel model_;
};

GbdtModel train_xgb(const Dataset& train, const BoostParams& params);
GbdtModel train_lgbm(const Dataset& train, const BoostParams& params);
GbdtModel train_boosting(const Dataset& train, const BoostParams& params);

}  // namespace edgebot
