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

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "edgebot/boosting.hpp"
#include "edgebot/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace edgebot;
using support::thrown;

namespace {

double accuracy(const GbdtModel& m, const Dataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) ok += m.predict_class(d.row(i)) == d.labels[i];
  return static_cast<double>(ok) / static_cast<double>(d.rows());
}

long double cross_entropy(long double margin, int y) {
  const long double p = 1.0L / (1.0L + std::exp(-margin));
  return -(y * std::log(p) + (1 - y) * std::log(1.0L - p));
}

BoostParams plain_xgb(int rounds) {
  BoostParams p;
  p.mode = BoostMode::Xgb;
  p.n_estimators = rounds;
  p.learning_rate = 0.3;
  p.max_depth = 3;
  return p;
}

double tree_sum(const GbdtModel& m, const std::vector<double>& x) {
  double s = 0.0;
  for (const auto& t : m.trees) s += t.payload(oracle::descend(t, 0, x))[0];
  return s;
}

}  // namespace

TEST_CASE("logloss derivatives at fixed points") {
  const auto s = logloss_grad_hess(0.5, 1.0);
  CHECK(s.g == -0.5);
  CHECK(s.h == 0.25);
  CHECK(logloss_grad_hess(1.0, 1.0).g == 0.0);
  CHECK(logloss_grad_hess(0.0, 0.0).g == 0.0);
  CHECK(thrown([] { logloss_grad_hess(1.5, 1.0); }) == ErrorKind::ProbabilityOutOfRange);
  CHECK(thrown([] { logloss_grad_hess(-0.1, 0.0); }) == ErrorKind::ProbabilityOutOfRange);
  CHECK(thrown([] { logloss_grad_hess(std::nan(""), 0.0); }) == ErrorKind::ProbabilityOutOfRange);
}

TEST_CASE("logloss derivatives match central finite differences in the margin") {
  const long double step = 1e-4L;
  for (int k = 1; k < 100; ++k) {
    const double p = k / 100.0;
    const long double m = std::log(static_cast<long double>(p) / (1.0L - p));
    for (int y : {0, 1}) {
      const auto gh = logloss_grad_hess(p, y);
      const long double lp = cross_entropy(m + step, y);
      const long double l0 = cross_entropy(m, y);
      const long double lm = cross_entropy(m - step, y);
      const long double g = (lp - lm) / (2 * step);
      const long double h = (lp - 2 * l0 + lm) / (step * step);
      CHECK(std::fabs((gh.g - g) / g) <= 1e-5L);
      CHECK(std::fabs((gh.h - h) / h) <= 1e-5L);
    }
  }
}

TEST_CASE("GOSS on ten rows") {
  const std::vector<double> g{0.1, -0.9, 0.2, 0.05, 0.8, -0.3, 0.15, 0.02, -0.25, 0.12};
  GossConfig c;
  Rng rng(3);
  const auto s = goss_sample(g, c, rng);
  REQUIRE(s.rows.size() == 3);
  CHECK(std::is_sorted(s.rows.begin(), s.rows.end()));
  std::size_t top = 0, sampled = 0;
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    if (s.rows[k] == 1 || s.rows[k] == 4) {
      CHECK(s.weights[k] == 1.0);
      ++top;
    } else {
      CHECK(s.weights[k] == doctest::Approx(8.0));
      ++sampled;
    }
  }
  CHECK(top == 2);
  CHECK(sampled == 1);

  GossConfig all{0.9, 0.1, true};
  const auto every = goss_sample(g, all, rng);
  CHECK(every.rows.size() == 10);
}

TEST_CASE("GOSS configuration errors") {
  CHECK(thrown([] { GossConfig{0.7, 0.5, true}.validate(); }) == ErrorKind::InvalidConfig);
  CHECK(thrown([] { GossConfig{0.2, 0.0, true}.validate(); }) == ErrorKind::InvalidConfig);
  CHECK(thrown([] { GossConfig{-0.1, 0.1, true}.validate(); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("GOSS weighted gradient sums are unbiased") {
  Rng data_rng(11);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> g(1000);
  for (auto& v : g) v = z(data_rng) + 0.3;
  const double full = std::accumulate(g.begin(), g.end(), 0.0);
  // Also a "bin": rows with index % 7 == 0.
  double full_bin = 0.0;
  for (std::size_t i = 0; i < g.size(); i += 7) full_bin += g[i];

  GossConfig c;
  Rng rng(12);
  const int reps = 1000;
  std::vector<double> sums, bins;
  for (int r = 0; r < reps; ++r) {
    const auto s = goss_sample(g, c, rng);
    double t = 0.0, b = 0.0;
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
      t += s.weights[k] * g[s.rows[k]];
      if (s.rows[k] % 7 == 0) b += s.weights[k] * g[s.rows[k]];
    }
    sums.push_back(t);
    bins.push_back(b);
  }
  auto within = [&](const std::vector<double>& v, double truth) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / reps;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (reps - 1) / reps);
    return std::fabs(mean - truth) <= 3.0 * se;
  };
  CHECK(within(sums, full));
  CHECK(within(bins, full_bin));
}

TEST_CASE("EFB bundling and exact decode") {
  SUBCASE("complementary indicators share a bundle") {
    std::vector<double> cols;
    const std::size_t n = 100;
    for (std::size_t i = 0; i < n; ++i) cols.push_back(i % 2 ? 1.0 : 0.0);
    for (std::size_t i = 0; i < n; ++i) cols.push_back(i % 2 ? 0.0 : 1.0);
    BinnedMatrix x(cols, n, 2);
    const auto fb = efb_bundle(x, 0);
    REQUIRE(fb.bundles.size() == 1);
    CHECK(fb.bundles[0].members.size() == 2);
  }
  SUBCASE("dense correlated columns stay apart") {
    std::vector<double> cols;
    const std::size_t n = 100;
    for (std::size_t i = 0; i < n; ++i) cols.push_back(1.0 + i);
    for (std::size_t i = 0; i < n; ++i) cols.push_back(2.0 + 2.0 * i);
    BinnedMatrix x(cols, n, 2);
    CHECK(efb_bundle(x, 0).bundles.size() == 2);
  }
  SUBCASE("random sparse matrix round trip") {
    const std::size_t n = 400, p = 20;
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> cols(n * p, 0.0);
    // Each row is nonzero in at most one of columns 0..9; 10..19 are sparse at random.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t hot = static_cast<std::size_t>(u(rng) * 12);
      if (hot < 10) cols[hot * n + i] = std::floor(u(rng) * 5) + 1;
      for (std::size_t j = 10; j < p; ++j) {
        if (u(rng) < 0.05) cols[j * n + i] = std::floor(u(rng) * 3) - 1.5;
      }
    }
    BinnedMatrix x(cols, n, p);
    const auto fb = efb_bundle(x, 0);
    CHECK(fb.feature_count() == p);
    CHECK(fb.bundles.size() < p);
    x.attach_bundles(fb);
    for (std::size_t b = 0; b < fb.bundles.size(); ++b) {
      CHECK(fb.bundles[b].conflicts == 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto bins = efb_decode(x, b, i);
        for (std::size_t k = 0; k < fb.bundles[b].members.size(); ++k) {
          CHECK(bins[k] == x.bin(i, fb.bundles[b].members[k]));
        }
      }
    }
  }
}

TEST_CASE("first round beats the constant predictor") {
  const Dataset d = separable_dataset(1000, 1);
  BoostTrainer t(d, plain_xgb(1));
  CHECK(t.training_logloss() == doctest::Approx(std::log(2.0)));
  t.round();
  CHECK(t.training_logloss() < std::log(2.0));
}

TEST_CASE("zero-variance features give a stump") {
  Dataset d = separable_dataset(200, 2);
  for (auto& v : d.values) v = 1.0;
  BoostTrainer t(d, plain_xgb(1));
  const auto before = t.margins();
  const DecisionTree& tree = t.round();
  CHECK(tree.node_count() == 1);
  const auto after = t.margins();
  const double shift = after[0] - before[0];
  for (std::size_t i = 0; i < after.size(); ++i) CHECK(after[i] - before[i] == shift);
}

TEST_CASE("margins equal base plus shrunken tree sum") {
  const Dataset d = separable_dataset(500, 3);
  BoostTrainer t(d, plain_xgb(3));
  t.run();
  const GbdtModel& m = t.model();
  REQUIRE(m.trees.size() == 3);
  const auto margins = t.margins();
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const std::vector<double> x(d.row(i).begin(), d.row(i).end());
    const double expect = m.base_score + m.learning_rate * tree_sum(m, x);
    CHECK(margins[i] == expect);
    CHECK(m.predict_margin(x) == expect);
  }
}

TEST_CASE("zero learning rate predicts the prior") {
  Dataset d = separable_dataset(400, 4);
  for (std::size_t i = 0; i < 100; ++i) d.labels[i] = 1;
  auto p = plain_xgb(5);
  p.learning_rate = 0.0;
  const auto m = train_xgb(d, p);
  const double rate = static_cast<double>(d.count_label(1)) / d.rows();
  CHECK(m.base_score == doctest::Approx(std::log(rate / (1 - rate))));
  for (std::size_t i = 0; i < d.rows(); ++i) {
    CHECK(m.predict_margin(d.row(i)) == m.base_score);
    CHECK(m.predict_proba(d.row(i)) == doctest::Approx(rate));
  }
}

TEST_CASE("prediction conventions") {
  GbdtModel m;
  const double x[1] = {0.0};
  CHECK(thrown([&] { m.predict_margin(x); }) == ErrorKind::UntrainedModel);
  m.trained = true;
  m.base_score = 0.7;
  CHECK(m.predict_proba(x) == doctest::Approx(1.0 / (1.0 + std::exp(-0.7))));
  m.base_score = 0.0;
  CHECK(m.predict_proba(x) == 0.5);
  CHECK(m.predict_class(x) == 1);
}

TEST_CASE("separable data: xgb within 20 rounds, lgbm by round 200 at eta 0.01") {
  const Dataset d = separable_dataset(2000, 5);
  auto xp = plain_xgb(20);
  xp.max_depth = 6;
  CHECK(accuracy(train_xgb(d, xp), d) >= 0.99);

  BoostParams lp;
  lp.mode = BoostMode::Lgbm;
  lp.n_estimators = 200;
  lp.learning_rate = 0.01;
  lp.max_depth = 5;
  lp.num_leaves = 31;
  lp.min_child_samples = 20;
  lp.subsample = 0.9;
  lp.colsample_bytree = 0.9;
  lp.reg_alpha = 1.0;
  lp.reg_lambda = 0.0;
  lp.min_child_weight = 1e-3;
  CHECK(accuracy(train_lgbm(d, lp), d) >= 0.99);
}

TEST_CASE("GOSS covering every row equals plain histogram boosting") {
  const Dataset d = separable_dataset(600, 6);
  BoostParams p;
  p.mode = BoostMode::Lgbm;
  p.n_estimators = 10;
  p.num_leaves = 15;
  p.max_depth = 5;
  p.goss = GossConfig{0.5, 0.5, true};
  const auto with = train_lgbm(d, p);
  p.goss.enabled = false;
  const auto without = train_lgbm(d, p);
  REQUIRE(with.trees.size() == without.trees.size());
  for (std::size_t k = 0; k < with.trees.size(); ++k) CHECK(with.trees[k] == without.trees[k]);
}

TEST_CASE("training logloss never rises without sampling") {
  const Dataset d = separable_dataset(800, 7);
  for (BoostMode mode : {BoostMode::Xgb, BoostMode::Lgbm}) {
    BoostParams p = plain_xgb(30);
    p.mode = mode;
    p.goss.enabled = false;
    BoostTrainer t(d, p);
    double prev = t.training_logloss();
    for (int r = 0; r < 30; ++r) {
      t.round();
      const double now = t.training_logloss();
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }
}

TEST_CASE("shrinkage homogeneity") {
  const Dataset d = separable_dataset(500, 8);
  const GbdtModel m = train_xgb(d, plain_xgb(10));
  GbdtModel twice = m;
  twice.learning_rate = 2.0 * m.learning_rate;
  for (auto& t : twice.trees) {
    for (std::size_t n = 0; n < t.node_count(); ++n) {
      for (auto& w : t.payload(n)) w *= 0.5;
    }
  }
  for (std::size_t i = 0; i < d.rows(); ++i) {
    CHECK(twice.predict_margin(d.row(i)) == m.predict_margin(d.row(i)));
  }
}

TEST_CASE("200-tree margin equals per-tree traversal sum") {
  const Dataset d = separable_dataset(400, 9);
  auto p = plain_xgb(200);
  p.learning_rate = 0.05;
  p.subsample = 0.8;
  p.colsample_bytree = 0.8;
  const auto m = train_xgb(d, p);
  REQUIRE(m.trees.size() == 200);
  Rng rng(10);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(d.cols());
    for (auto& v : x) v = z(rng);
    CHECK(m.predict_margin(x) == m.base_score + m.learning_rate * tree_sum(m, x));
  }
}

TEST_CASE("exact and histogram xgb agree on few distinct values") {
  Rng rng(13);
  const Dataset d = oracle::random_dataset(rng, 150, 4, 6);
  auto p = plain_xgb(5);
  p.tree_method = TreeMethod::Exact;
  const auto exact = train_xgb(d, p);
  p.tree_method = TreeMethod::Hist;
  const auto hist = train_xgb(d, p);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    CHECK(exact.predict_margin(d.row(i)) == doctest::Approx(hist.predict_margin(d.row(i))).epsilon(1e-9));
  }
}

TEST_CASE("boosting parameter validation") {
  auto p = plain_xgb(1);
  p.subsample = 0.0;
  CHECK(thrown([&] { validate(p); }) == ErrorKind::InvalidParams);
  p = plain_xgb(1);
  p.learning_rate = -0.1;
  CHECK(thrown([&] { validate(p); }) == ErrorKind::InvalidParams);
  p = plain_xgb(1);
  p.mode = BoostMode::Lgbm;
  p.goss = GossConfig{0.8, 0.5, true};
  CHECK(thrown([&] { validate(p); }) == ErrorKind::InvalidConfig);
}
