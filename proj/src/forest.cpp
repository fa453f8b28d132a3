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

#include "edgebot/forest.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "edgebot/error.hpp"

namespace edgebot {

BootstrapSample bootstrap_sample(std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorKind::EmptyInput, "bootstrap of zero rows");
  BootstrapSample s;
  s.indices.resize(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (auto& i : s.indices) i = pick(rng);
  std::sort(s.indices.begin(), s.indices.end());
  std::size_t j = 0;
  for (std::size_t r = 0; r < n; ++r) {
    while (j < n && s.indices[j] < r) ++j;
    if (j == n || s.indices[j] != r) s.oob.push_back(r);
  }
  return s;
}

std::size_t sqrt_features(std::size_t p) {
  std::size_t k = 0;
  while (k * k < p) ++k;
  return std::max<std::size_t>(k, 1);
}

void validate(const ForestParams& p) {
  if (p.n_estimators < 1) throw Error(ErrorKind::InvalidParams, "n_estimators must be >= 1");
  if (p.max_depth < 0) throw Error(ErrorKind::InvalidParams, "max_depth must be >= 0");
  if (!(p.min_samples_split >= 2)) {
    throw Error(ErrorKind::InvalidParams, "min_samples_split must be >= 2");
  }
  if (!(p.min_samples_leaf >= 1)) {
    throw Error(ErrorKind::InvalidParams, "min_samples_leaf must be >= 1");
  }
}

std::uint8_t majority(std::span<const double> counts) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[best]) best = k;
  }
  return static_cast<std::uint8_t>(best);
}

ForestVote ForestModel::predict_class(std::span<const double> x) const {
  if (!trained()) throw Error(ErrorKind::UntrainedModel, "forest has no trees");
  ForestVote v;
  v.fractions.assign(classes, 0.0);
  std::vector<std::size_t> votes(classes, 0);
  for (const auto& t : trees) {
    if (t.payload_kind() != PayloadKind::ClassCounts) {
      throw Error(ErrorKind::PayloadKindMismatch, "hard voting needs class-count leaves");
    }
    ++votes[majority(t.traverse(x))];
  }
  std::size_t best = 0;
  for (std::size_t k = 0; k < classes; ++k) {
    v.fractions[k] = static_cast<double>(votes[k]) / static_cast<double>(trees.size());
    if (votes[k] > votes[best]) best = k;
  }
  v.label = static_cast<std::uint8_t>(best);
  return v;
}

double ForestModel::predict_mean(std::span<const double> x) const {
  if (!trained()) throw Error(ErrorKind::UntrainedModel, "forest has no trees");
  double sum = 0.0;
  for (const auto& t : trees) sum += t.value(x);
  return sum / static_cast<double>(trees.size());
}

double ForestModel::score(std::span<const double> x) const {
  const auto v = predict_class(x);
  return v.fractions.size() > 1 ? v.fractions[1] : 0.0;
}

ForestModel train_forest(const Dataset& train, const ForestParams& params,
                         const SplitObserver& observer) {
  validate(params);
  if (train.rows() == 0) throw Error(ErrorKind::EmptyInput, "empty training set");
  if (train.cols() == 0) throw Error(ErrorKind::InvalidConfig, "training set has no features");

  ForestModel model;
  model.params = params;
  model.feature_names = train.feature_names;
  std::uint8_t max_label = 1;
  for (auto l : train.labels) max_label = std::max(max_label, l);
  model.classes = static_cast<std::size_t>(max_label) + 1;
  const std::size_t p = train.cols();
  model.features_per_split =
      params.max_features == MaxFeatures::Sqrt ? sqrt_features(p) : p;

  const TrainingMatrix x(train);
  const GiniTarget target{train.labels, model.classes};
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_split = params.min_samples_split;
  tp.min_samples_leaf = params.min_samples_leaf;

  const auto m = static_cast<std::size_t>(params.n_estimators);
  model.trees.resize(m);
  model.tree_seeds.resize(m);
  for (std::size_t k = 0; k < m; ++k) model.tree_seeds[k] = derive_seed(params.seed, k);

  const std::size_t k_feat = model.features_per_split;
  auto build = [&](std::size_t k) {
    Rng rng(model.tree_seeds[k]);
    std::vector<std::size_t> rows;
    std::vector<double> weights;
    if (params.bootstrap) {
      const auto sample = bootstrap_sample(train.rows(), rng);
      for (std::size_t i = 0; i < sample.indices.size(); ++i) {
        if (rows.empty() || rows.back() != sample.indices[i]) {
          rows.push_back(sample.indices[i]);
          weights.push_back(0.0);
        }
        weights.back() += 1.0;
      }
    } else {
      rows.resize(train.rows());
      std::iota(rows.begin(), rows.end(), 0);
    }
    std::vector<std::size_t> pool(p);
    FeatureSampler sampler = [&](Rng& r) {
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t i = 0; i < k_feat; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, p - 1);
        std::swap(pool[i], pool[pick(r)]);
      }
      std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k_feat));
      std::sort(chosen.begin(), chosen.end());
      if (observer) observer(k, chosen);
      return chosen;
    };
    model.trees[k] = grow_tree(x, rows, weights, target, tp, sampler, rng);
  };

  unsigned threads = params.threads ? params.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(m)));
  if (threads == 1) {
    for (std::size_t k = 0; k < m; ++k) build(k);
    return model;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < m; k = next++) {
        try {
          build(k);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return model;
}

}  // namespace edgebot
