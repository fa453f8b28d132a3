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

#include "edgebot/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edgebot/error.hpp"

namespace edgebot {

double sigmoid(double margin) {
  if (margin >= 0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

GradHess logloss_grad_hess(double p, double y) {
  // Endpoints allowed: g = p - y, h = 0 there.
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::ProbabilityOutOfRange, "probability must lie in [0, 1]");
  }
  if (y != 0.0 && y != 1.0) throw Error(ErrorKind::InvalidParams, "label must be 0 or 1");
  return {p - y, p * (1.0 - p)};
}

// ---------------------------------------------------------------------------
// GOSS

void GossConfig::validate() const {
  if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0) || a + b > 1.0) {
    throw Error(ErrorKind::InvalidConfig, "GOSS needs a, b in (0, 1) with a + b <= 1");
  }
}

GossSample goss_sample(std::span<const double> grad, const GossConfig& config, Rng& rng,
                       std::span<const std::size_t> candidates) {
  config.validate();
  std::vector<std::size_t> pool;
  if (candidates.empty()) {
    pool.resize(grad.size());
    std::iota(pool.begin(), pool.end(), 0);
  } else {
    pool.assign(candidates.begin(), candidates.end());
  }
  const std::size_t n = pool.size();
  const auto top = std::min(n, static_cast<std::size_t>(std::floor(config.a * static_cast<double>(n) + 1e-9)));
  std::stable_sort(pool.begin(), pool.end(), [&](std::size_t l, std::size_t r) {
    return std::abs(grad[l]) > std::abs(grad[r]);
  });
  const std::size_t rest = n - top;
  const auto other = std::min(rest, static_cast<std::size_t>(std::floor(config.b * static_cast<double>(n) + 1e-9)));
  // Partial Fisher-Yates over the tail picks `other` rows uniformly.
  for (std::size_t i = 0; i < other; ++i) {
    std::uniform_int_distribution<std::size_t> pick(top + i, n - 1);
    std::swap(pool[top + i], pool[pick(rng)]);
  }
  const double amp = config.amplification();
  std::vector<std::pair<std::size_t, double>> chosen;
  chosen.reserve(top + other);
  for (std::size_t i = 0; i < top; ++i) chosen.emplace_back(pool[i], 1.0);
  for (std::size_t i = top; i < top + other; ++i) chosen.emplace_back(pool[i], amp);
  std::sort(chosen.begin(), chosen.end());
  GossSample s;
  for (auto [r, w] : chosen) {
    s.rows.push_back(r);
    s.weights.push_back(w);
  }
  return s;
}

// ---------------------------------------------------------------------------
// EFB

FeatureBundle efb_bundle(const BinnedMatrix& x, std::size_t conflict_budget) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<std::vector<std::uint8_t>> nonzero(p);
  std::vector<std::size_t> counts(p, 0);
  for (std::size_t f = 0; f < p; ++f) {
    const std::int32_t zero = x.mapper(f).zero_bin;
    nonzero[f].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      nonzero[f][i] = zero < 0 || x.bin(i, f) != static_cast<std::uint32_t>(zero);
      counts[f] += nonzero[f][i];
    }
  }
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return counts[l] > counts[r]; });

  struct Open {
    std::vector<std::size_t> members;
    std::vector<std::uint8_t> occupied;
    std::size_t conflicts = 0;
    bool closed = false;
  };
  std::vector<Open> open;
  for (std::size_t f : order) {
    const bool bundleable = x.mapper(f).zero_bin >= 0;
    bool placed = false;
    if (bundleable) {
      for (auto& b : open) {
        if (b.closed) continue;
        std::size_t c = b.conflicts;
        for (std::size_t i = 0; i < n && c <= conflict_budget; ++i) c += nonzero[f][i] & b.occupied[i];
        if (c > conflict_budget) continue;
        b.conflicts = c;
        b.members.push_back(f);
        for (std::size_t i = 0; i < n; ++i) b.occupied[i] |= nonzero[f][i];
        placed = true;
        break;
      }
    }
    if (!placed) {
      Open b;
      b.members.push_back(f);
      b.occupied = nonzero[f];
      b.closed = !bundleable;
      open.push_back(std::move(b));
    }
  }

  FeatureBundle out;
  out.conflict_budget = conflict_budget;
  for (auto& b : open) {
    FeatureBundle::Bundle bundle;
    bundle.members = std::move(b.members);
    bundle.conflicts = b.conflicts;
    if (bundle.members.size() == 1) {
      bundle.offsets = {0};
      bundle.total_bins = static_cast<std::uint32_t>(x.mapper(bundle.members[0]).bins());
    } else {
      std::uint32_t offset = 1;
      for (std::size_t f : bundle.members) {
        bundle.offsets.push_back(offset);
        offset += static_cast<std::uint32_t>(x.mapper(f).bins() - 1);
      }
      bundle.total_bins = offset;
    }
    out.bundles.push_back(std::move(bundle));
  }
  return out;
}

std::vector<std::uint32_t> efb_decode(const BinnedMatrix& x, std::size_t bundle,
                                      std::size_t row) {
  if (!x.bundles()) throw Error(ErrorKind::InvalidConfig, "no bundles attached");
  const auto& b = x.bundles()->bundles.at(bundle);
  const std::uint32_t v = x.bundle_bin(row, bundle);
  if (b.members.size() == 1) return {v};
  std::vector<std::uint32_t> out;
  for (std::size_t m = 0; m < b.members.size(); ++m) {
    const auto& mapper = x.mapper(b.members[m]);
    const auto zero = static_cast<std::uint32_t>(mapper.zero_bin);
    const std::uint32_t lo = b.offsets[m];
    const std::uint32_t hi = lo + static_cast<std::uint32_t>(mapper.bins() - 1);
    if (v >= lo && v < hi) {
      const std::uint32_t local = v - lo;
      out.push_back(local < zero ? local : local + 1);
    } else {
      out.push_back(zero);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model

void validate(const BoostParams& p) {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidParams, msg); };
  if (p.n_estimators < 0) bad("n_estimators must be >= 0");
  if (!(p.learning_rate >= 0.0) || !std::isfinite(p.learning_rate)) bad("learning_rate must be >= 0");
  if (p.max_depth < 0) bad("max_depth must be >= 0");
  if (p.num_leaves == 1) bad("num_leaves must be 0 or >= 2");
  if (!(p.min_child_samples >= 1.0)) bad("min_child_samples must be >= 1");
  if (!(p.min_child_weight >= 0.0)) bad("min_child_weight must be >= 0");
  if (!(p.subsample > 0.0 && p.subsample <= 1.0)) bad("subsample must lie in (0, 1]");
  if (!(p.colsample_bytree > 0.0 && p.colsample_bytree <= 1.0)) {
    bad("colsample_bytree must lie in (0, 1]");
  }
  if (!(p.gamma >= 0.0) || !(p.reg_alpha >= 0.0) || !(p.reg_lambda >= 0.0)) {
    bad("regularization terms must be >= 0");
  }
  if (p.max_bins < 4 || p.max_bins > 65535) bad("max_bins must lie in [4, 65535]");
  if (p.mode == BoostMode::Lgbm && p.goss.enabled) p.goss.validate();
}

double GbdtModel::predict_margin(std::span<const double> x) const {
  if (!trained) throw Error(ErrorKind::UntrainedModel, "boosted model is not trained");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.value(x);
  return base_score + learning_rate * sum;
}

double GbdtModel::predict_proba(std::span<const double> x) const {
  return sigmoid(predict_margin(x));
}

std::uint8_t GbdtModel::predict_class(std::span<const double> x) const {
  return predict_proba(x) >= 0.5 ? 1 : 0;
}

struct BoostTrainer::Impl {
  const Dataset& data;
  BoostParams params;
  std::optional<TrainingMatrix> exact;
  std::optional<BinnedMatrix> binned;
  std::vector<double> sums;  // per-row sum of unshrunk tree outputs
  std::vector<double> grad, hess, wgrad, whess;
  std::size_t round = 0;

  Impl(const Dataset& d, const BoostParams& p) : data(d), params(p) {}
};

BoostTrainer::BoostTrainer(const Dataset& train, const BoostParams& params)
    : impl_(std::make_unique<Impl>(train, params)) {
  validate(params);
  if (train.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty training set");
  if (train.cols() == 0) throw Error(ErrorKind::InvalidConfig, "training set has no features");
  for (auto l : train.labels) {
    if (l > 1) throw Error(ErrorKind::InvalidConfig, "boosting is binary only");
  }
  Impl& s = *impl_;
  const std::size_t n = train.rows();
  if (params.tree_method == TreeMethod::Exact) {
    s.exact.emplace(train);
  } else {
    s.binned.emplace(train, params.max_bins);
    if (params.mode == BoostMode::Lgbm && params.use_efb) {
      s.binned->attach_bundles(efb_bundle(*s.binned, params.efb_conflict_budget));
      model_.bundles = s.binned->bundles();
    }
  }
  s.sums.assign(n, 0.0);
  s.grad.resize(n);
  s.hess.resize(n);

  const double pos = static_cast<double>(train.count_label(1));
  const double rate = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
  model_.mode = params.mode;
  model_.base_score = std::log(rate / (1.0 - rate));
  model_.learning_rate = params.learning_rate;
  model_.params = params;
  model_.feature_names = train.feature_names;
  model_.trained = true;
}

BoostTrainer::~BoostTrainer() = default;

std::vector<double> BoostTrainer::margins() const {
  std::vector<double> m(impl_->sums.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = model_.base_score + model_.learning_rate * impl_->sums[i];
  }
  return m;
}

double BoostTrainer::training_logloss() const {
  const auto m = margins();
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double z = impl_->data.labels[i] ? -m[i] : m[i];
    s += z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return s / static_cast<double>(m.size());
}

const DecisionTree& BoostTrainer::round() {
  Impl& s = *impl_;
  const BoostParams& p = s.params;
  const std::size_t n = s.data.rows();
  const std::size_t cols = s.data.cols();

  for (std::size_t i = 0; i < n; ++i) {
    const double margin = model_.base_score + model_.learning_rate * s.sums[i];
    const double prob = std::clamp(sigmoid(margin), 1e-15, 1.0 - 1e-15);
    const auto gh = logloss_grad_hess(prob, s.data.labels[i]);
    s.grad[i] = gh.g;
    s.hess[i] = gh.h;
  }

  // Independent streams per round so toggling one sampler never shifts another.
  Rng col_rng(derive_seed(p.seed, 3 * s.round));
  Rng bag_rng(derive_seed(p.seed, 3 * s.round + 1));
  Rng goss_rng(derive_seed(p.seed, 3 * s.round + 2));

  std::vector<std::size_t> features(cols);
  std::iota(features.begin(), features.end(), 0);
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(p.colsample_bytree * static_cast<double>(cols) + 1e-9)));
  if (keep < cols) {
    for (std::size_t i = 0; i < keep; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, cols - 1);
      std::swap(features[i], features[pick(col_rng)]);
    }
    features.resize(keep);
    std::sort(features.begin(), features.end());
  }

  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (p.subsample < 1.0) {
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(p.subsample * static_cast<double>(n) + 1e-9)));
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(rows[i], rows[pick(bag_rng)]);
    }
    rows.resize(m);
    std::sort(rows.begin(), rows.end());
  }

  std::span<const double> g = s.grad, h = s.hess;
  if (p.mode == BoostMode::Lgbm && p.goss.enabled) {
    auto sample = goss_sample(s.grad, p.goss, goss_rng, rows);
    s.wgrad.assign(n, 0.0);
    s.whess.assign(n, 0.0);
    for (std::size_t k = 0; k < sample.rows.size(); ++k) {
      const std::size_t r = sample.rows[k];
      s.wgrad[r] = s.grad[r] * sample.weights[k];
      s.whess[r] = s.hess[r] * sample.weights[k];
    }
    rows = std::move(sample.rows);
    g = s.wgrad;
    h = s.whess;
  }

  TreeParams tp;
  tp.max_depth = p.max_depth;
  tp.min_samples_split = 2.0 * p.min_child_samples;
  tp.min_samples_leaf = p.min_child_samples;
  tp.objective = p.objective();
  if (p.mode == BoostMode::Lgbm) {
    tp.growth = Growth::LeafWise;
    tp.max_leaves = p.num_leaves;
  }
  const GradTarget target{g, h, tp.objective};
  DecisionTree tree = s.exact ? grow_tree(*s.exact, rows, target, tp, features)
                              : grow_tree_histogram(*s.binned, rows, target, tp, features);

  for (std::size_t i = 0; i < n; ++i) s.sums[i] += tree.value_unchecked(s.data.row(i).data());
  model_.trees.push_back(std::move(tree));
  ++s.round;
  return model_.trees.back();
}

void BoostTrainer::run() {
  while (static_cast<int>(model_.trees.size()) < impl_->params.n_estimators) round();
}

GbdtModel BoostTrainer::take_model() { return std::move(model_); }

GbdtModel train_boosting(const Dataset& train, const BoostParams& params) {
  BoostTrainer trainer(train, params);
  trainer.run();
  return trainer.take_model();
}

GbdtModel train_xgb(const Dataset& train, const BoostParams& params) {
  BoostParams p = params;
  p.mode = BoostMode::Xgb;
  return train_boosting(train, p);
}

GbdtModel train_lgbm(const Dataset& train, const BoostParams& params) {
  BoostParams p = params;
  p.mode = BoostMode::Lgbm;
  return train_boosting(train, p);
}

}  // namespace edgebot
