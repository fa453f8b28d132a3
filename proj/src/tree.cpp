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

#include "edgebot/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "edgebot/error.hpp"

namespace edgebot {

// ---------------------------------------------------------------------------
// DecisionTree

std::int32_t DecisionTree::add_node(const TreeNode& node, std::span<const double> payload) {
  if (payload.size() != width_) {
    throw Error(ErrorKind::PayloadKindMismatch, "payload width does not match tree");
  }
  nodes_.push_back(node);
  payload_.insert(payload_.end(), payload.begin(), payload.end());
  if (node.feature >= 0) {
    feature_bound_ = std::max(feature_bound_, static_cast<std::size_t>(node.feature) + 1);
  }
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

void DecisionTree::set_split(std::int32_t id, std::int32_t feature, double threshold,
                             double gain, std::int32_t left, std::int32_t right) {
  TreeNode& n = nodes_.at(static_cast<std::size_t>(id));
  n.feature = feature;
  n.threshold = threshold;
  n.gain = gain;
  n.left = left;
  n.right = right;
  feature_bound_ = std::max(feature_bound_, static_cast<std::size_t>(feature) + 1);
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  int best = 0;
  std::vector<std::pair<std::int32_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.is_leaf()) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_index(std::span<const double> x) const {
  if (nodes_.empty()) throw Error(ErrorKind::UntrainedModel, "empty tree");
  if (x.size() < feature_bound_) {
    throw Error(ErrorKind::FeatureIndexOutOfRange,
                "input has " + std::to_string(x.size()) + " features, tree uses " +
                    std::to_string(feature_bound_));
  }
  return leaf_index_unchecked(x.data());
}

double DecisionTree::value(std::span<const double> x) const {
  if (kind_ != PayloadKind::Value) {
    throw Error(ErrorKind::PayloadKindMismatch, "tree carries class counts, not values");
  }
  return payload(leaf_index(x))[0];
}

void DecisionTree::check() const {
  if (nodes_.empty()) throw Error(ErrorKind::InvalidConfig, "tree has no nodes");
  std::vector<int> parents(nodes_.size(), 0);
  for (const auto& n : nodes_) {
    if (n.is_leaf()) continue;
    for (auto c : {n.left, n.right}) {
      if (c <= 0 || static_cast<std::size_t>(c) >= nodes_.size()) {
        throw Error(ErrorKind::InvalidConfig, "child index out of range");
      }
      ++parents[static_cast<std::size_t>(c)];
    }
  }
  if (parents[0] != 0) throw Error(ErrorKind::InvalidConfig, "root has a parent");
  for (std::size_t i = 1; i < parents.size(); ++i) {
    if (parents[i] != 1) throw Error(ErrorKind::InvalidConfig, "node without exactly one parent");
  }
  // One parent per non-root node plus reachability from the root rules out cycles.
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::int32_t> stack{0};
  std::size_t visited = 0;
  while (!stack.empty()) {
    auto id = static_cast<std::size_t>(stack.back());
    stack.pop_back();
    if (seen[id]) throw Error(ErrorKind::InvalidConfig, "cycle in tree");
    seen[id] = true;
    ++visited;
    if (!nodes_[id].is_leaf()) {
      stack.push_back(nodes_[id].left);
      stack.push_back(nodes_[id].right);
    }
  }
  if (visited != nodes_.size()) throw Error(ErrorKind::InvalidConfig, "unreachable nodes");
}

// ---------------------------------------------------------------------------
// Impurity

double gini(std::span<const double> class_counts) {
  double total = 0.0;
  for (double c : class_counts) total += c;
  if (!(total > 0.0)) throw Error(ErrorKind::EmptyNode, "gini of an empty node");
  double sum_sq = 0.0;
  for (double c : class_counts) {
    const double p = c / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double gini_gain(std::span<const double> parent, std::span<const double> left,
                 std::span<const double> right) {
  if (parent.size() != left.size() || parent.size() != right.size()) {
    throw Error(ErrorKind::CountMismatch, "class count vectors differ in length");
  }
  double n = 0, nl = 0, nr = 0;
  for (std::size_t k = 0; k < parent.size(); ++k) {
    if (left[k] + right[k] != parent[k]) {
      throw Error(ErrorKind::CountMismatch, "children do not sum to the parent");
    }
    n += parent[k];
    nl += left[k];
    nr += right[k];
  }
  if (!(nl > 0.0) || !(nr > 0.0)) throw Error(ErrorKind::EmptyChild, "split with an empty child");
  return gini(parent) - (nl / n) * gini(left) - (nr / n) * gini(right);
}

double BoostObjective::shrink(double g) const {
  if (alpha <= 0.0) return g;
  const double mag = std::abs(g) - alpha;
  if (mag <= 0.0) return 0.0;
  return g > 0 ? mag : -mag;
}

double BoostObjective::leaf_weight(double g, double h) const {
  const double denom = h + lambda;
  if (!(denom > 0.0)) return 0.0;
  return -shrink(g) / denom;
}

double BoostObjective::score(double g, double h) const {
  const double denom = h + lambda;
  if (!(denom > 0.0)) return 0.0;
  const double s = shrink(g);
  return s * s / denom;
}

double BoostObjective::split_gain(double gl, double hl, double gr, double hr, double g,
                                  double h) const {
  return 0.5 * (score(gl, hl) + score(gr, hr) - score(g, h)) - gamma;
}

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) * 0.5;
  return (mid >= hi || mid < lo) ? lo : mid;
}

// ---------------------------------------------------------------------------
// TrainingMatrix

TrainingMatrix::TrainingMatrix(const Dataset& data)
    : rows_(data.rows()), cols_(data.cols()) {
  values_.resize(rows_ * cols_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) values_[j * rows_ + i] = data.at(i, j);
  }
  distinct_.resize(cols_);
  codes_.resize(rows_ * cols_);
  for (std::size_t j = 0; j < cols_; ++j) {
    auto col = column(j);
    std::vector<double> d(col.begin(), col.end());
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    for (std::size_t i = 0; i < rows_; ++i) {
      codes_[j * rows_ + i] = static_cast<std::uint32_t>(
          std::lower_bound(d.begin(), d.end(), col[i]) - d.begin());
    }
    distinct_[j] = std::move(d);
  }
}

// ---------------------------------------------------------------------------
// Exact search

namespace {

// Per-row statistics are accumulated into flat slots of width W. Slot 0 is
// always the weighted count.
struct GiniPolicy {
  const GiniTarget* target;
  std::size_t width() const { return target->classes + 1; }
  void add(std::size_t row, double w, double* dst) const {
    dst[0] += w;
    dst[1 + target->labels[row]] += w;
  }
  // Returns gain or NaN when the candidate is not admissible.
  double gain(const double* left, const double* total, std::vector<double>& scratch,
              const SplitLimits& limits) const {
    const std::size_t k = target->classes;
    const double nl = left[0];
    const double nr = total[0] - left[0];
    if (nl < limits.min_samples_leaf || nr < limits.min_samples_leaf || nl <= 0 || nr <= 0) {
      return std::nan("");
    }
    scratch.resize(3 * k);
    for (std::size_t c = 0; c < k; ++c) {
      scratch[c] = total[1 + c];
      scratch[k + c] = left[1 + c];
      scratch[2 * k + c] = total[1 + c] - left[1 + c];
    }
    return gini_gain({scratch.data(), k}, {scratch.data() + k, k}, {scratch.data() + 2 * k, k});
  }
  bool informative(double gain, const double*) const { return gain > kMinGiniGain; }
  NodeStats stats(const double* s) const {
    NodeStats out;
    out.count = s[0];
    out.class_counts.assign(s + 1, s + 1 + target->classes);
    return out;
  }
};

struct GradPolicy {
  const GradTarget* target;
  std::size_t width() const { return 3; }
  void add(std::size_t row, double w, double* dst) const {
    dst[0] += w;
    dst[1] += target->grad[row];
    dst[2] += target->hess[row];
  }
  double gain(const double* left, const double* total, std::vector<double>&,
              const SplitLimits& limits) const {
    const double nl = left[0];
    const double nr = total[0] - left[0];
    const double hl = left[2];
    const double hr = total[2] - left[2];
    const double mcw = target->objective.min_child_weight;
    if (nl < limits.min_samples_leaf || nr < limits.min_samples_leaf || nl <= 0 || nr <= 0 ||
        hl < mcw || hr < mcw) {
      return std::nan("");
    }
    return target->objective.split_gain(left[1], hl, total[1] - left[1], hr, total[1], total[2]);
  }
  bool informative(double gain, const double* total) const {
    return gain > 1e-12 * std::max(1.0, target->objective.score(total[1], total[2]));
  }
  NodeStats stats(const double* s) const {
    NodeStats out;
    out.count = s[0];
    out.grad = s[1];
    out.hess = s[2];
    return out;
  }
};

template <class Policy>
class ExactSearch {
 public:
  ExactSearch(const TrainingMatrix& x, Policy policy) : x_(x), policy_(policy) {}

  std::optional<SplitCandidate> run(std::span<const std::size_t> rows,
                                    std::span<const double> weights,
                                    std::span<const std::size_t> features,
                                    const SplitLimits& limits) {
    std::vector<std::size_t> sorted(features.begin(), features.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t w = policy_.width();
    std::optional<SplitCandidate> best;
    double best_gain = 0.0;
    std::vector<double> left(w), total(w), best_left(w), best_total(w);
    for (std::size_t f : sorted) {
      if (f >= x_.cols()) {
        throw Error(ErrorKind::FeatureIndexOutOfRange, "candidate feature out of range");
      }
      group(f, rows, weights);
      const std::size_t groups = codes_.size();
      if (groups < 2) continue;
      std::fill(total.begin(), total.end(), 0.0);
      for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t k = 0; k < w; ++k) total[k] += sums_[g * w + k];
      }
      std::fill(left.begin(), left.end(), 0.0);
      const auto distinct = x_.distinct(f);
      for (std::size_t g = 0; g + 1 < groups; ++g) {
        for (std::size_t k = 0; k < w; ++k) left[k] += sums_[g * w + k];
        const double gain = policy_.gain(left.data(), total.data(), scratch_, limits);
        if (std::isnan(gain) || !policy_.informative(gain, total.data())) continue;
        if (!best || gain > best_gain) {
          best_gain = gain;
          SplitCandidate c;
          c.feature = f;
          c.threshold = midpoint(distinct[codes_[g]], distinct[codes_[g + 1]]);
          c.gain = gain;
          best = std::move(c);
          best_left = left;
          best_total = total;
        }
      }
    }
    if (best) {
      best->left = policy_.stats(best_left.data());
      std::vector<double> right(w);
      for (std::size_t k = 0; k < w; ++k) right[k] = best_total[k] - best_left[k];
      best->right = policy_.stats(right.data());
    }
    return best;
  }

 private:
  // Fills codes_/sums_ with per-distinct-value sums in ascending value order,
  // each accumulated in node row order.
  void group(std::size_t f, std::span<const std::size_t> rows, std::span<const double> weights) {
    const std::size_t w = policy_.width();
    const std::size_t d = x_.distinct(f).size();
    codes_.clear();
    sums_.clear();
    if (d <= 2 * rows.size() + 16) {
      buckets_.assign(d * w, 0.0);
      touched_.assign(d, 0);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        const std::uint32_t c = x_.code(r, f);
        touched_[c] = 1;
        policy_.add(r, weights.empty() ? 1.0 : weights[i], buckets_.data() + c * w);
      }
      for (std::size_t c = 0; c < d; ++c) {
        if (!touched_[c]) continue;
        codes_.push_back(static_cast<std::uint32_t>(c));
        sums_.insert(sums_.end(), buckets_.begin() + static_cast<std::ptrdiff_t>(c * w),
                     buckets_.begin() + static_cast<std::ptrdiff_t>((c + 1) * w));
      }
      return;
    }
    order_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      order_[i] = {x_.code(rows[i], f), static_cast<std::uint32_t>(i)};
    }
    std::sort(order_.begin(), order_.end());
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const auto [c, pos] = order_[i];
      if (codes_.empty() || codes_.back() != c) {
        codes_.push_back(c);
        sums_.resize(sums_.size() + w, 0.0);
      }
      policy_.add(rows[pos], weights.empty() ? 1.0 : weights[pos],
                  sums_.data() + (codes_.size() - 1) * w);
    }
  }

  const TrainingMatrix& x_;
  Policy policy_;
  std::vector<std::uint32_t> codes_;
  std::vector<double> sums_;
  std::vector<double> buckets_;
  std::vector<std::uint8_t> touched_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order_;
  std::vector<double> scratch_;
};

}  // namespace

std::optional<SplitCandidate> best_split_exhaustive(const TrainingMatrix& x,
                                                    std::span<const std::size_t> rows,
                                                    std::span<const double> weights,
                                                    std::span<const std::size_t> features,
                                                    const GiniTarget& target,
                                                    const SplitLimits& limits) {
  ExactSearch<GiniPolicy> search(x, GiniPolicy{&target});
  return search.run(rows, weights, features, limits);
}

std::optional<SplitCandidate> best_split_exhaustive(const TrainingMatrix& x,
                                                    std::span<const std::size_t> rows,
                                                    std::span<const double> weights,
                                                    std::span<const std::size_t> features,
                                                    const GradTarget& target,
                                                    const SplitLimits& limits) {
  ExactSearch<GradPolicy> search(x, GradPolicy{&target});
  return search.run(rows, weights, features, limits);
}

// ---------------------------------------------------------------------------
// Binning

std::uint32_t BinMapper::bin(double v) const {
  return static_cast<std::uint32_t>(std::lower_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
}

BinMapper fit_bin_mapper(std::span<const double> values, std::size_t max_bins) {
  if (max_bins < 4) throw Error(ErrorKind::InvalidParams, "max_bins must be at least 4");
  BinMapper m;
  if (values.empty()) {
    m.representative.push_back(0.0);
    return m;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct;
  std::vector<std::size_t> counts;
  for (double v : sorted) {
    if (distinct.empty() || distinct.back() != v) {
      distinct.push_back(v);
      counts.push_back(0);
    }
    ++counts.back();
  }
  const std::size_t d = distinct.size();
  if (d <= max_bins) {
    for (std::size_t i = 0; i + 1 < d; ++i) m.cuts.push_back(midpoint(distinct[i], distinct[i + 1]));
    m.representative = distinct;
    m.exact = true;
  } else {
    // Greedy equal-frequency bins; an exact zero always gets its own bin so
    // sparse features keep a clean default bin.
    const double target = static_cast<double>(sorted.size()) / static_cast<double>(max_bins - 3);
    double acc = 0.0;
    m.representative.push_back(distinct[0]);
    for (std::size_t i = 0; i + 1 < d; ++i) {
      acc += static_cast<double>(counts[i]);
      const bool force = distinct[i] == 0.0 || distinct[i + 1] == 0.0;
      if (acc >= target || force) {
        m.cuts.push_back(midpoint(distinct[i], distinct[i + 1]));
        m.representative.push_back(distinct[i + 1]);
        acc = 0.0;
      }
    }
  }
  auto zero = std::lower_bound(distinct.begin(), distinct.end(), 0.0);
  if (zero != distinct.end() && *zero == 0.0) {
    const std::uint32_t b = m.bin(0.0);
    const bool prev_apart = zero == distinct.begin() || m.bin(*(zero - 1)) != b;
    const bool next_apart = zero + 1 == distinct.end() || m.bin(*(zero + 1)) != b;
    if (prev_apart && next_apart) m.zero_bin = static_cast<std::int32_t>(b);
  }
  return m;
}

std::size_t FeatureBundle::feature_count() const {
  std::size_t n = 0;
  for (const auto& b : bundles) n += b.members.size();
  return n;
}

BinnedMatrix::BinnedMatrix(const Dataset& data, std::size_t max_bins) : rows_(data.rows()) {
  const std::size_t p = data.cols();
  mappers_.reserve(p);
  bins_.resize(rows_ * p);
  for (std::size_t f = 0; f < p; ++f) {
    const auto col = data.column(f);
    mappers_.push_back(fit_bin_mapper(col, max_bins));
    for (std::size_t i = 0; i < rows_; ++i) {
      bins_[f * rows_ + i] = static_cast<std::uint16_t>(mappers_.back().bin(col[i]));
    }
  }
}

BinnedMatrix::BinnedMatrix(std::span<const double> column_major, std::size_t rows,
                           std::size_t cols, std::size_t max_bins)
    : rows_(rows) {
  mappers_.reserve(cols);
  bins_.resize(rows * cols);
  for (std::size_t f = 0; f < cols; ++f) {
    auto col = column_major.subspan(f * rows, rows);
    mappers_.push_back(fit_bin_mapper(col, max_bins));
    for (std::size_t i = 0; i < rows; ++i) {
      bins_[f * rows + i] = static_cast<std::uint16_t>(mappers_.back().bin(col[i]));
    }
  }
}

void BinnedMatrix::attach_bundles(FeatureBundle bundles) {
  if (bundles.feature_count() != cols()) {
    throw Error(ErrorKind::InvalidConfig, "bundle map does not cover every feature");
  }
  bundle_bins_.assign(rows_ * bundles.bundles.size(), 0);
  for (std::size_t b = 0; b < bundles.bundles.size(); ++b) {
    const auto& bundle = bundles.bundles[b];
    std::uint32_t* out = bundle_bins_.data() + b * rows_;
    if (bundle.members.size() == 1) {
      const std::size_t f = bundle.members[0];
      for (std::size_t i = 0; i < rows_; ++i) out[i] = bin(i, f);
      continue;
    }
    for (std::size_t m = 0; m < bundle.members.size(); ++m) {
      const std::size_t f = bundle.members[m];
      const auto zero = static_cast<std::uint32_t>(mappers_[f].zero_bin);
      for (std::size_t i = 0; i < rows_; ++i) {
        const std::uint32_t v = bin(i, f);
        if (v == zero) continue;
        out[i] = bundle.offsets[m] + (v < zero ? v : v - 1);
      }
    }
  }
  bundles_ = std::move(bundles);
}

Histogram BinnedMatrix::empty_histogram() const {
  Histogram h;
  h.offsets.resize(cols() + 1, 0);
  for (std::size_t f = 0; f < cols(); ++f) h.offsets[f + 1] = h.offsets[f] + mappers_[f].bins();
  h.bins.assign(h.offsets.back(), HistBin{});
  return h;
}

Histogram BinnedMatrix::build_histogram(std::span<const std::size_t> rows,
                                        std::span<const double> grad,
                                        std::span<const double> hess,
                                        const std::vector<bool>& active) const {
  Histogram h = empty_histogram();
  auto is_active = [&](std::size_t f) { return active.empty() || active[f]; };
  if (!bundles_) {
    for (std::size_t f = 0; f < cols(); ++f) {
      if (!is_active(f)) continue;
      HistBin* out = h.bins.data() + h.offsets[f];
      const std::uint16_t* col = bins_.data() + f * rows_;
      for (std::size_t r : rows) {
        HistBin& b = out[col[r]];
        b.grad += grad[r];
        b.hess += hess[r];
        b.count += 1.0;
      }
    }
    return h;
  }

  HistBin total;
  for (std::size_t r : rows) {
    total.grad += grad[r];
    total.hess += hess[r];
    total.count += 1.0;
  }
  std::vector<HistBin> scratch;
  for (std::size_t b = 0; b < bundles_->bundles.size(); ++b) {
    const auto& bundle = bundles_->bundles[b];
    if (std::none_of(bundle.members.begin(), bundle.members.end(), is_active)) continue;
    const std::uint32_t* col = bundle_bins_.data() + b * rows_;
    if (bundle.members.size() == 1) {
      HistBin* out = h.bins.data() + h.offsets[bundle.members[0]];
      for (std::size_t r : rows) {
        HistBin& hb = out[col[r]];
        hb.grad += grad[r];
        hb.hess += hess[r];
        hb.count += 1.0;
      }
      continue;
    }
    scratch.assign(bundle.total_bins, HistBin{});
    for (std::size_t r : rows) {
      HistBin& hb = scratch[col[r]];
      hb.grad += grad[r];
      hb.hess += hess[r];
      hb.count += 1.0;
    }
    // Expand into member histograms; each member's zero bin is the node total
    // minus its own nonzero bins.
    for (std::size_t m = 0; m < bundle.members.size(); ++m) {
      const std::size_t f = bundle.members[m];
      auto out = h.feature(f);
      const auto zero = static_cast<std::size_t>(mappers_[f].zero_bin);
      HistBin nonzero;
      for (std::size_t v = 0; v < out.size(); ++v) {
        if (v == zero) continue;
        const HistBin& src = scratch[bundle.offsets[m] + (v < zero ? v : v - 1)];
        out[v] = src;
        nonzero.grad += src.grad;
        nonzero.hess += src.hess;
        nonzero.count += src.count;
      }
      out[zero] = {total.grad - nonzero.grad, total.hess - nonzero.hess,
                   total.count - nonzero.count};
    }
  }
  return h;
}

Histogram Histogram::minus(const Histogram& other) const {
  Histogram out = *this;
  for (std::size_t i = 0; i < out.bins.size(); ++i) {
    out.bins[i].grad -= other.bins[i].grad;
    out.bins[i].hess -= other.bins[i].hess;
    out.bins[i].count -= other.bins[i].count;
  }
  return out;
}

std::optional<SplitCandidate> best_split_histogram(const Histogram& hist,
                                                   const std::vector<BinMapper>& mappers,
                                                   std::span<const std::size_t> features,
                                                   const NodeStats& /*totals*/,
                                                   const BoostObjective& objective,
                                                   const SplitLimits& limits) {
  std::vector<std::size_t> sorted(features.begin(), features.end());
  std::sort(sorted.begin(), sorted.end());
  GradTarget target{{}, {}, objective};
  GradPolicy policy{&target};
  std::optional<SplitCandidate> best;
  double best_gain = 0.0;
  std::vector<double> scratch;
  double best_left[3] = {0, 0, 0}, best_total[3] = {0, 0, 0};
  for (std::size_t f : sorted) {
    auto bins = hist.feature(f);
    if (bins.size() < 2) continue;
    // Same accumulation order as exact search: per-bin sums, then a running
    // prefix in ascending bin order.
    double total[3] = {0, 0, 0};
    for (const auto& b : bins) {
      total[0] += b.count;
      total[1] += b.grad;
      total[2] += b.hess;
    }
    double left[3] = {0, 0, 0};
    for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
      left[0] += bins[b].count;
      left[1] += bins[b].grad;
      left[2] += bins[b].hess;
      // Boundaries after an empty bin repeat an earlier partition.
      if (bins[b].count == 0.0) continue;
      const double gain = policy.gain(left, total, scratch, limits);
      if (std::isnan(gain) || !policy.informative(gain, total)) continue;
      if (!best || gain > best_gain) {
        best_gain = gain;
        SplitCandidate c;
        c.feature = f;
        c.bin = static_cast<std::uint32_t>(b);
        c.threshold = mappers[f].cuts[b];
        if (mappers[f].exact) {
          // Midpoint to the next value present in the node, as exact search does.
          std::size_t next = b + 1;
          while (next + 1 < bins.size() && bins[next].count == 0.0) ++next;
          c.threshold = midpoint(mappers[f].representative[b], mappers[f].representative[next]);
        }
        c.gain = gain;
        best = std::move(c);
        std::copy(left, left + 3, best_left);
        std::copy(total, total + 3, best_total);
      }
    }
  }
  if (best) {
    best->left = policy.stats(best_left);
    double right[3] = {best_total[0] - best_left[0], best_total[1] - best_left[1],
                       best_total[2] - best_left[2]};
    best->right = policy.stats(right);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Growth

void validate(const TreeParams& p) {
  if (p.max_depth < 0) throw Error(ErrorKind::InvalidParams, "max_depth must be >= 0");
  if (!(p.min_samples_split >= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "min_samples_split must be >= 1");
  }
  if (!(p.min_samples_leaf >= 1.0)) {
    throw Error(ErrorKind::InvalidParams, "min_samples_leaf must be >= 1");
  }
  if (p.growth == Growth::LeafWise && p.max_leaves == 1) {
    throw Error(ErrorKind::InvalidParams, "num_leaves must be >= 2");
  }
  if (p.objective.lambda < 0 || p.objective.gamma < 0 || p.objective.alpha < 0 ||
      p.objective.min_child_weight < 0) {
    throw Error(ErrorKind::InvalidParams, "regularization terms must be non-negative");
  }
}

namespace {

struct Work {
  std::size_t begin = 0;
  std::size_t end = 0;
  int depth = 0;
  std::int32_t node = 0;
  NodeStats stats;
  std::optional<SplitCandidate> best;
  Histogram hist;
};

// Split-finding strategy plugged into the shared growth loop.
class Splitter {
 public:
  virtual ~Splitter() = default;
  virtual NodeStats stats(std::span<const std::size_t> rows, std::span<const double> weights) = 0;
  virtual std::optional<SplitCandidate> find(Work& w, std::span<const std::size_t> rows,
                                             std::span<const double> weights) = 0;
  virtual bool goes_left(std::size_t row, const SplitCandidate& c) const = 0;
  virtual void payload(const NodeStats& s, std::span<double> out) const = 0;
  virtual double cover(const NodeStats& s) const = 0;
  virtual void prepare_children(Work&, Work&, Work&, std::span<const std::size_t>) {}
  virtual PayloadKind kind() const = 0;
  virtual std::size_t width() const = 0;
};

class GiniSplitter final : public Splitter {
 public:
  GiniSplitter(const TrainingMatrix& x, const GiniTarget& t, const FeatureSampler& sampler,
               Rng& rng, double min_leaf)
      : x_(x), t_(t), sampler_(sampler), rng_(rng), search_(x, GiniPolicy{&t_}),
        limits_{min_leaf} {}

  NodeStats stats(std::span<const std::size_t> rows, std::span<const double> weights) override {
    NodeStats s;
    s.class_counts.assign(t_.classes, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      s.count += w;
      s.class_counts[t_.labels[rows[i]]] += w;
    }
    return s;
  }
  std::optional<SplitCandidate> find(Work&, std::span<const std::size_t> rows,
                                     std::span<const double> weights) override {
    const auto features = sampler_(rng_);
    return search_.run(rows, weights, features, limits_);
  }
  bool goes_left(std::size_t row, const SplitCandidate& c) const override {
    return x_.value(row, c.feature) <= c.threshold;
  }
  void payload(const NodeStats& s, std::span<double> out) const override {
    std::copy(s.class_counts.begin(), s.class_counts.end(), out.begin());
  }
  double cover(const NodeStats& s) const override { return s.count; }
  PayloadKind kind() const override { return PayloadKind::ClassCounts; }
  std::size_t width() const override { return t_.classes; }

 private:
  const TrainingMatrix& x_;
  GiniTarget t_;
  const FeatureSampler& sampler_;
  Rng& rng_;
  ExactSearch<GiniPolicy> search_;
  SplitLimits limits_;
};

class GradStatsMixin {
 public:
  explicit GradStatsMixin(const GradTarget& t) : t_(t) {}
  NodeStats grad_stats(std::span<const std::size_t> rows) const {
    NodeStats s;
    for (std::size_t r : rows) {
      s.count += 1.0;
      s.grad += t_.grad[r];
      s.hess += t_.hess[r];
    }
    return s;
  }

 protected:
  GradTarget t_;
};

class ExactGradSplitter final : public Splitter, private GradStatsMixin {
 public:
  ExactGradSplitter(const TrainingMatrix& x, const GradTarget& t,
                    std::span<const std::size_t> features, double min_leaf)
      : GradStatsMixin(t), x_(x), features_(features), search_(x, GradPolicy{&t_}),
        limits_{min_leaf} {}

  NodeStats stats(std::span<const std::size_t> rows, std::span<const double>) override {
    return grad_stats(rows);
  }
  std::optional<SplitCandidate> find(Work&, std::span<const std::size_t> rows,
                                     std::span<const double>) override {
    return search_.run(rows, {}, features_, limits_);
  }
  bool goes_left(std::size_t row, const SplitCandidate& c) const override {
    return x_.value(row, c.feature) <= c.threshold;
  }
  void payload(const NodeStats& s, std::span<double> out) const override {
    out[0] = t_.objective.leaf_weight(s.grad, s.hess);
  }
  double cover(const NodeStats& s) const override { return s.hess; }
  PayloadKind kind() const override { return PayloadKind::Value; }
  std::size_t width() const override { return 1; }

 private:
  const TrainingMatrix& x_;
  std::span<const std::size_t> features_;
  ExactSearch<GradPolicy> search_;
  SplitLimits limits_;
};

class HistogramSplitter final : public Splitter, private GradStatsMixin {
 public:
  HistogramSplitter(const BinnedMatrix& x, const GradTarget& t,
                    std::span<const std::size_t> features, double min_leaf)
      : GradStatsMixin(t), x_(x), features_(features), limits_{min_leaf},
        active_(x.cols(), false) {
    for (std::size_t f : features) active_.at(f) = true;
  }

  NodeStats stats(std::span<const std::size_t> rows, std::span<const double>) override {
    return grad_stats(rows);
  }
  std::optional<SplitCandidate> find(Work& w, std::span<const std::size_t> rows,
                                     std::span<const double>) override {
    if (w.hist.bins.empty()) w.hist = x_.build_histogram(rows, t_.grad, t_.hess, active_);
    return best_split_histogram(w.hist, x_.mappers(), features_, w.stats, t_.objective, limits_);
  }
  bool goes_left(std::size_t row, const SplitCandidate& c) const override {
    return x_.bin(row, c.feature) <= c.bin;
  }
  void payload(const NodeStats& s, std::span<double> out) const override {
    out[0] = t_.objective.leaf_weight(s.grad, s.hess);
  }
  double cover(const NodeStats& s) const override { return s.hess; }
  // Build the smaller child from rows, derive the larger by subtraction.
  void prepare_children(Work& parent, Work& left, Work& right,
                        std::span<const std::size_t> rows) override {
    if (parent.hist.bins.empty()) return;
    const bool left_small = (left.end - left.begin) <= (right.end - right.begin);
    Work& small = left_small ? left : right;
    Work& large = left_small ? right : left;
    small.hist = x_.build_histogram(rows.subspan(small.begin, small.end - small.begin), t_.grad,
                                    t_.hess, active_);
    large.hist = parent.hist.minus(small.hist);
    parent.hist = Histogram{};
  }
  PayloadKind kind() const override { return PayloadKind::Value; }
  std::size_t width() const override { return 1; }

 private:
  const BinnedMatrix& x_;
  std::span<const std::size_t> features_;
  SplitLimits limits_;
  std::vector<bool> active_;
};

DecisionTree grow(Splitter& splitter, std::span<const std::size_t> rows_in,
                  std::span<const double> weights_in, const TreeParams& params) {
  validate(params);
  if (rows_in.empty()) throw Error(ErrorKind::EmptyNode, "cannot grow a tree on zero rows");
  std::vector<std::size_t> rows(rows_in.begin(), rows_in.end());
  std::vector<double> weights(weights_in.begin(), weights_in.end());
  const bool weighted = !weights.empty();

  DecisionTree tree(splitter.kind(), splitter.width());
  std::vector<double> payload(splitter.width());

  auto rows_of = [&](const Work& w) {
    return std::span<const std::size_t>(rows).subspan(w.begin, w.end - w.begin);
  };
  auto weights_of = [&](const Work& w) {
    return weighted ? std::span<const double>(weights).subspan(w.begin, w.end - w.begin)
                    : std::span<const double>();
  };
  auto make_node = [&](Work& w) {
    w.stats = splitter.stats(rows_of(w), weights_of(w));
    splitter.payload(w.stats, payload);
    TreeNode node;
    node.cover = splitter.cover(w.stats);
    node.samples = w.stats.count;
    w.node = tree.add_node(node, payload);
  };
  auto splittable = [&](const Work& w) {
    return w.depth < params.max_depth && w.stats.count >= params.min_samples_split &&
           w.stats.count >= 2.0 * params.min_samples_leaf;
  };

  Work root;
  root.begin = 0;
  root.end = rows.size();
  make_node(root);
  if (splittable(root)) root.best = splitter.find(root, rows_of(root), weights_of(root));

  std::deque<Work> pending;
  pending.push_back(std::move(root));
  std::size_t leaves = 1;
  const bool leaf_wise = params.growth == Growth::LeafWise;

  while (!pending.empty()) {
    if (params.max_leaves && leaves >= params.max_leaves) break;
    auto pick = pending.begin();
    if (leaf_wise) {
      // Best-first: largest gain, earliest node on ties.
      pick = pending.end();
      for (auto it = pending.begin(); it != pending.end(); ++it) {
        if (!it->best) continue;
        if (pick == pending.end() || it->best->gain > pick->best->gain) pick = it;
      }
      if (pick == pending.end()) break;
    }
    Work w = std::move(*pick);
    pending.erase(pick);
    if (!w.best) continue;
    const SplitCandidate& c = *w.best;

    // Stable partition of the node's rows (and their weights) by the split.
    std::vector<std::size_t> left_rows, right_rows;
    std::vector<double> left_w, right_w;
    for (std::size_t i = w.begin; i < w.end; ++i) {
      const bool go_left = splitter.goes_left(rows[i], c);
      (go_left ? left_rows : right_rows).push_back(rows[i]);
      if (weighted) (go_left ? left_w : right_w).push_back(weights[i]);
    }
    std::copy(left_rows.begin(), left_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(w.begin));
    std::copy(right_rows.begin(), right_rows.end(),
              rows.begin() + static_cast<std::ptrdiff_t>(w.begin + left_rows.size()));
    if (weighted) {
      std::copy(left_w.begin(), left_w.end(), weights.begin() + static_cast<std::ptrdiff_t>(w.begin));
      std::copy(right_w.begin(), right_w.end(),
                weights.begin() + static_cast<std::ptrdiff_t>(w.begin + left_w.size()));
    }

    Work l, r;
    l.begin = w.begin;
    l.end = w.begin + left_rows.size();
    r.begin = l.end;
    r.end = w.end;
    l.depth = r.depth = w.depth + 1;
    make_node(l);
    make_node(r);
    tree.set_split(w.node, static_cast<std::int32_t>(c.feature), c.threshold, c.gain, l.node,
                   r.node);
    ++leaves;

    const bool l_split = splittable(l), r_split = splittable(r);
    if (l_split || r_split) splitter.prepare_children(w, l, r, rows);
    if (l_split) l.best = splitter.find(l, rows_of(l), weights_of(l));
    if (r_split) r.best = splitter.find(r, rows_of(r), weights_of(r));
    if (l.best) pending.push_back(std::move(l));
    if (r.best) pending.push_back(std::move(r));
  }
  return tree;
}

}  // namespace

DecisionTree grow_tree(const TrainingMatrix& x, std::span<const std::size_t> rows,
                       std::span<const double> weights, const GiniTarget& target,
                       const TreeParams& params, const FeatureSampler& sampler, Rng& rng) {
  if (!weights.empty() && weights.size() != rows.size()) {
    throw Error(ErrorKind::LengthMismatch, "weights must align with rows");
  }
  GiniSplitter splitter(x, target, sampler, rng, params.min_samples_leaf);
  return grow(splitter, rows, weights, params);
}

DecisionTree grow_tree(const TrainingMatrix& x, std::span<const std::size_t> rows,
                       const GradTarget& target, const TreeParams& params,
                       std::span<const std::size_t> features) {
  ExactGradSplitter splitter(x, target, features, params.min_samples_leaf);
  return grow(splitter, rows, {}, params);
}

DecisionTree grow_tree_histogram(const BinnedMatrix& x, std::span<const std::size_t> rows,
                                 const GradTarget& target, const TreeParams& params,
                                 std::span<const std::size_t> features) {
  HistogramSplitter splitter(x, target, features, params.min_samples_leaf);
  return grow(splitter, rows, {}, params);
}

}  // namespace edgebot
