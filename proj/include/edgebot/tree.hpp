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
#include <optional>
#include <span>
#include <vector>

#include "edgebot/dataset.hpp"
#include "edgebot/rng.hpp"

namespace edgebot {

// ---------------------------------------------------------------------------
// Decision tree

enum class PayloadKind : std::uint8_t { ClassCounts = 0, Value = 1 };

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // x <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double gain = 0.0;          // split gain, 0 for leaves
  double cover = 0.0;         // hessian mass (boosting) or weighted samples (forest)
  double samples = 0.0;       // weighted row count reaching this node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Binary threshold tree. Node 0 is the root. Every node carries
/// payload_width payload values: class counts (forest) or one leaf weight
/// (boosting); only leaf payloads are used for prediction.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(PayloadKind kind, std::size_t width) : kind_(kind), width_(width) {}

  PayloadKind payload_kind() const { return kind_; }
  std::size_t payload_width() const { return width_; }

  std::int32_t add_node(const TreeNode& node, std::span<const double> payload);
  void set_split(std::int32_t id, std::int32_t feature, double threshold, double gain,
                 std::int32_t left, std::int32_t right);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<double>& payloads() const { return payload_; }
  std::span<const double> payload(std::size_t node) const {
    return {payload_.data() + node * width_, width_};
  }
  std::span<double> payload(std::size_t node) { return {payload_.data() + node * width_, width_}; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t leaf_count() const;
  int depth() const;
  /// One past the largest feature index referenced, 0 for a single leaf.
  std::size_t feature_bound() const { return feature_bound_; }

  /// Root-to-leaf walk; throws FeatureIndexOutOfRange if x is too short.
  std::size_t leaf_index(std::span<const double> x) const;
  std::size_t leaf_index_unchecked(const double* x) const {
    std::size_t n = 0;
    while (nodes_[n].feature >= 0) {
      const TreeNode& node = nodes_[n];
      n = static_cast<std::size_t>(x[node.feature] <= node.threshold ? node.left : node.right);
    }
    return n;
  }
  std::span<const double> traverse(std::span<const double> x) const {
    return payload(leaf_index(x));
  }
  /// Leaf value for Value trees.
  double value(std::span<const double> x) const;
  double value_unchecked(const double* x) const { return payload_[leaf_index_unchecked(x) * width_]; }

  /// Validates structure (single root, two children per split, acyclic).
  void check() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  PayloadKind kind_ = PayloadKind::Value;
  std::size_t width_ = 1;
  std::vector<TreeNode> nodes_;
  std::vector<double> payload_;
  std::size_t feature_bound_ = 0;
};

// ---------------------------------------------------------------------------
// Impurity and gain

double gini(std::span<const double> class_counts);
double gini_gain(std::span<const double> parent, std::span<const double> left,
                 std::span<const double> right);

/// Second-order objective with Omega(f) = gamma*T + lambda/2 * sum(w^2) and
/// optional L1 shrinkage applied to the gradient sum.
struct BoostObjective {
  double lambda = 1.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double min_child_weight = 0.0;

  double shrink(double g) const;
  double leaf_weight(double g, double h) const;
  double score(double g, double h) const;
  double split_gain(double gl, double hl, double gr, double hr, double g, double h) const;
};

/// Threshold halfway between two consecutive distinct values, clamped so the
/// lower value always goes left.
double midpoint(double lo, double hi);

// ---------------------------------------------------------------------------
// Split search

struct NodeStats {
  double count = 0.0;  // weighted samples
  double grad = 0.0;
  double hess = 0.0;
  std::vector<double> class_counts;
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
  NodeStats left;
  NodeStats right;
  // Histogram splits also record the last bin routed left.
  std::uint32_t bin = 0;
};

struct GiniTarget {
  std::span<const std::uint8_t> labels;
  std::size_t classes = 2;
};

struct GradTarget {
  std::span<const double> grad;
  std::span<const double> hess;
  BoostObjective objective;
};

struct SplitLimits {
  double min_samples_leaf = 1.0;
};

/// Column-major copy of a dataset with per-feature sorted distinct values and
/// dense value codes, shared by all trees grown on the same data.
class TrainingMatrix {
 public:
  TrainingMatrix() = default;
  explicit TrainingMatrix(const Dataset& data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double value(std::size_t row, std::size_t col) const { return values_[col * rows_ + row]; }
  std::span<const double> column(std::size_t col) const {
    return {values_.data() + col * rows_, rows_};
  }
  std::span<const double> distinct(std::size_t col) const { return distinct_[col]; }
  std::uint32_t code(std::size_t row, std::size_t col) const { return codes_[col * rows_ + row]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<std::vector<double>> distinct_;
  std::vector<std::uint32_t> codes_;
};

/// Exact search over midpoints between consecutive distinct values present in
/// the node. weights are per-row multiplicities (empty = all 1). Returns the
/// maximal-gain candidate; ties go to the lower feature index, then the lower
/// threshold. None when no candidate beats the objective's floor.
std::optional<SplitCandidate> best_split_exhaustive(const TrainingMatrix& x,
                                                    std::span<const std::size_t> rows,
                                                    std::span<const double> weights,
                                                    std::span<const std::size_t> features,
                                                    const GiniTarget& target,
                                                    const SplitLimits& limits);
std::optional<SplitCandidate> best_split_exhaustive(const TrainingMatrix& x,
                                                    std::span<const std::size_t> rows,
                                                    std::span<const double> weights,
                                                    std::span<const std::size_t> features,
                                                    const GradTarget& target,
                                                    const SplitLimits& limits);

/// Gini splits must beat this to count as informative (absorbs rounding).
inline constexpr double kMinGiniGain = 1e-12;

// ---------------------------------------------------------------------------
// Histograms

/// Quantile bin edges for one feature. bin(v) = number of cuts below v, so
/// v <= cuts[b] exactly when bin(v) <= b.
struct BinMapper {
  std::vector<double> cuts;
  // Smallest training value that fell in each bin.
  std::vector<double> representative;
  std::int32_t zero_bin = -1;  // bin holding exactly 0.0 on its own, if any
  bool exact = false;          // one distinct training value per bin

  std::size_t bins() const { return cuts.size() + 1; }
  std::uint32_t bin(double v) const;
};

inline constexpr std::size_t kMaxBins = 255;

BinMapper fit_bin_mapper(std::span<const double> values, std::size_t max_bins = kMaxBins);

struct HistBin {
  double grad = 0.0;
  double hess = 0.0;
  double count = 0.0;
  bool operator==(const HistBin&) const = default;
};

/// Per-feature aggregates laid out back to back; offsets[f] is the first bin
/// of feature f and offsets.back() the total bin count.
struct Histogram {
  std::vector<std::size_t> offsets;
  std::vector<HistBin> bins;

  std::span<const HistBin> feature(std::size_t f) const {
    return {bins.data() + offsets[f], offsets[f + 1] - offsets[f]};
  }
  std::span<HistBin> feature(std::size_t f) {
    return {bins.data() + offsets[f], offsets[f + 1] - offsets[f]};
  }
  /// this - other, bin by bin (sibling subtraction).
  Histogram minus(const Histogram& other) const;
};

/// Exclusive feature bundles. Members of a multi-feature bundle share one
/// column: bin 0 means every member sits in its zero bin, otherwise the value
/// lies in exactly one member's range [offset, offset + bins - 1).
struct FeatureBundle {
  struct Bundle {
    std::vector<std::size_t> members;
    std::vector<std::uint32_t> offsets;
    std::uint32_t total_bins = 0;
    std::size_t conflicts = 0;
  };
  std::vector<Bundle> bundles;
  std::size_t conflict_budget = 0;

  std::size_t feature_count() const;
};

/// Binned training data. Per-feature bins drive partitioning; when bundles
/// are attached, histogram construction scans bundle columns instead.
class BinnedMatrix {
 public:
  BinnedMatrix() = default;
  explicit BinnedMatrix(const Dataset& data, std::size_t max_bins = kMaxBins);
  BinnedMatrix(std::span<const double> column_major, std::size_t rows, std::size_t cols,
               std::size_t max_bins = kMaxBins);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return mappers_.size(); }
  const BinMapper& mapper(std::size_t f) const { return mappers_[f]; }
  const std::vector<BinMapper>& mappers() const { return mappers_; }
  std::uint16_t bin(std::size_t row, std::size_t f) const { return bins_[f * rows_ + row]; }

  void attach_bundles(FeatureBundle bundles);
  const std::optional<FeatureBundle>& bundles() const { return bundles_; }
  std::uint32_t bundle_bin(std::size_t row, std::size_t b) const {
    return bundle_bins_[b * rows_ + row];
  }

  Histogram empty_histogram() const;
  /// Aggregates (grad, hess, 1) of the given rows for the features flagged in
  /// active (empty = all). Uses bundle columns when attached.
  Histogram build_histogram(std::span<const std::size_t> rows, std::span<const double> grad,
                            std::span<const double> hess,
                            const std::vector<bool>& active = {}) const;

 private:
  std::size_t rows_ = 0;
  std::vector<BinMapper> mappers_;
  std::vector<std::uint16_t> bins_;
  std::optional<FeatureBundle> bundles_;
  std::vector<std::uint32_t> bundle_bins_;
};

/// Split search over bin boundaries. totals are the node sums.
std::optional<SplitCandidate> best_split_histogram(const Histogram& hist,
                                                   const std::vector<BinMapper>& mappers,
                                                   std::span<const std::size_t> features,
                                                   const NodeStats& totals,
                                                   const BoostObjective& objective,
                                                   const SplitLimits& limits);

// ---------------------------------------------------------------------------
// Growth

enum class Growth : std::uint8_t { DepthWise, LeafWise };

struct TreeParams {
  int max_depth = 6;
  std::size_t max_leaves = 0;      // 0 = unbounded
  double min_samples_split = 2.0;
  double min_samples_leaf = 1.0;
  Growth growth = Growth::DepthWise;
  BoostObjective objective;        // grad-hess objective only
};

/// Picks candidate features for one node. Called once per split attempt.
using FeatureSampler = std::function<std::vector<std::size_t>(Rng&)>;

/// Gini tree over exact split search (forest mode). weights are bootstrap
/// multiplicities aligned with rows.
DecisionTree grow_tree(const TrainingMatrix& x, std::span<const std::size_t> rows,
                       std::span<const double> weights, const GiniTarget& target,
                       const TreeParams& params, const FeatureSampler& sampler, Rng& rng);

/// Grad-hess tree over exact split search (exact boosting, oracle tests).
DecisionTree grow_tree(const TrainingMatrix& x, std::span<const std::size_t> rows,
                       const GradTarget& target, const TreeParams& params,
                       std::span<const std::size_t> features);

/// Grad-hess tree over histograms with sibling subtraction (boosting modes).
DecisionTree grow_tree_histogram(const BinnedMatrix& x, std::span<const std::size_t> rows,
                                 const GradTarget& target, const TreeParams& params,
                                 std::span<const std::size_t> features);

void validate(const TreeParams& params);

}  // namespace edgebot
