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
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgebot/boosting.hpp"
#include "edgebot/feature_select.hpp"
#include "edgebot/forest.hpp"
#include "edgebot/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace edgebot;
using support::thrown;

namespace {

// Integer-valued draws so ties are common.
std::vector<double> tied(Rng& rng, std::size_t n, int levels) {
  std::uniform_int_distribution<int> d(0, levels - 1);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("rank examples") {
  CHECK(rank(std::vector<double>{10, 20, 30}) == std::vector<double>{1, 2, 3});
  CHECK(rank(std::vector<double>{5, 5, 7}) == std::vector<double>{1.5, 1.5, 3});
  CHECK(rank(std::vector<double>{3, 1, 2}) == std::vector<double>{3, 1, 2});
  CHECK(thrown([] { rank(std::vector<double>{}); }) == ErrorKind::EmptyInput);
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto v = tied(rng, 50, 8);
    CHECK(rank(v) == oracle::ranks(v));
  }
}

TEST_CASE("spearman examples") {
  const std::vector<double> x{1, 2, 3};
  CHECK(spearman(x, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman(x, std::vector<double>{3, 1, 2}) == doctest::Approx(-0.5));
  CHECK(spearman(x, std::vector<double>{1, 4, 90}) == doctest::Approx(1.0));
  CHECK(thrown([&] { spearman(x, std::vector<double>{1, 2}); }) == ErrorKind::LengthMismatch);
  CHECK(thrown([&] { spearman(x, std::vector<double>{7, 7, 7}); }) == ErrorKind::ConstantInput);
  CHECK(thrown([] { spearman(std::vector<double>{1}, std::vector<double>{2}); }) ==
        ErrorKind::EmptyInput);
}

TEST_CASE("spearman matches rank-then-Pearson on tie-bearing pairs") {
  Rng rng(2);
  std::uniform_int_distribution<int> len(2, 200), lv(2, 12);
  int checked = 0;
  while (checked < 1000) {
    const std::size_t n = static_cast<std::size_t>(len(rng));
    const auto x = tied(rng, n, lv(rng));
    const auto y = tied(rng, n, lv(rng));
    const auto rx = oracle::ranks(x), ry = oracle::ranks(y);
    if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
    if (std::all_of(y.begin(), y.end(), [&](double v) { return v == y[0]; })) continue;
    CHECK(std::fabs(spearman(x, y) - oracle::spearman(x, y)) <= 1e-9);
    ++checked;
  }
}

TEST_CASE("spearman symmetry, self-correlation, monotone invariance") {
  Rng rng(3);
  std::normal_distribution<double> z;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(60), y(60);
    for (auto& v : x) v = z(rng);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.5 * x[i] + z(rng);
    const double r = spearman(x, y);
    CHECK(spearman(y, x) == r);
    CHECK(spearman(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> ex(x.size()), cy(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      ex[i] = std::exp(x[i]);
      cy[i] = y[i] * y[i] * y[i];
    }
    CHECK(std::fabs(spearman(ex, cy) - r) <= 1e-12);
  }
}

TEST_CASE("correlation matrix") {
  Rng rng(4);
  Dataset d = oracle::random_dataset(rng, 120, 5, 7);
  // Column 1 duplicates column 0, column 2 negates it.
  for (std::size_t i = 0; i < d.rows(); ++i) {
    d.at(i, 1) = d.at(i, 0);
    d.at(i, 2) = -d.at(i, 0);
  }
  const auto m = correlation_matrix(d);
  REQUIRE(m.size() == 6);
  CHECK(m.names.back() == "label");
  CHECK(*m.at(0, 1) == doctest::Approx(1.0));
  CHECK(*m.at(0, 2) == doctest::Approx(-1.0));
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < d.cols(); ++j) cols.push_back(d.column(j));
  cols.emplace_back(d.labels.begin(), d.labels.end());
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = 0; b < m.size(); ++b) {
      REQUIRE(m.at(a, b).has_value());
      CHECK(std::fabs(*m.at(a, b) - oracle::spearman(cols[a], cols[b])) <= 1e-12);
    }
  }

  SUBCASE("constant column is flagged, not fatal") {
    for (std::size_t i = 0; i < d.rows(); ++i) d.at(i, 4) = 3.0;
    const auto c = correlation_matrix(d);
    CHECK(c.constant[4]);
    CHECK_FALSE(c.at(4, 0).has_value());
    CHECK_FALSE(c.at(4, 4).has_value());
    CHECK(c.at(0, 3).has_value());
    std::ostringstream csv, lng;
    write_correlation_csv(csv, c);
    write_correlation_long(lng, c);
    CHECK(lng.str().rfind("feature_a,feature_b,r\n", 0) == 0);
    CHECK(to_json(c)["constant_columns"] == nlohmann::json::array({"f4"}));
    CHECK(to_json(c)["matrix"][4][0].is_null());
  }
}

TEST_CASE("importance from a single split") {
  DecisionTree t(PayloadKind::Value, 1);
  const double w[1] = {0.0};
  t.add_node(TreeNode{}, w);
  TreeNode leaf;
  leaf.cover = 5;
  const auto l = t.add_node(leaf, w);
  const auto r = t.add_node(leaf, w);
  t.set_split(0, 3, 0.5, 2.5, l, r);
  const std::vector<DecisionTree> trees{t};
  const auto rep = tree_importance(trees, {"a", "b", "c", "d", "e"}, "toy");
  CHECK(rep.weight == std::vector<double>{0, 0, 0, 1, 0});
  CHECK(rep.gain[3] == 2.5);
  CHECK(select_nonzero(rep) == std::vector<std::string>{"d"});
  CHECK_FALSE(rep.empty());

  const std::vector<DecisionTree> stumps{DecisionTree(PayloadKind::Value, 1)};
  DecisionTree lone(PayloadKind::Value, 1);
  lone.add_node(TreeNode{}, w);
  const auto none = tree_importance(std::vector<DecisionTree>{lone}, {"a", "b"}, "stump");
  CHECK(none.empty());
  CHECK(thrown([&] { select_nonzero(none); }) == ErrorKind::AllZero);
}

TEST_CASE("select_nonzero keeps column order") {
  ImportanceReport rep;
  rep.feature_names = {"a", "b", "c"};
  rep.weight = {5, 0, 1};
  rep.gain = {1, 1, 1};
  rep.cover = {0, 0, 0};
  CHECK(select_nonzero(rep) == std::vector<std::string>{"a", "c"});
  CHECK(select_nonzero(rep, ImportanceMode::Gain) == rep.feature_names);
  CHECK(thrown([&] { select_nonzero(rep, ImportanceMode::Cover); }) == ErrorKind::AllZero);
  CHECK(importance_mode_from_string("gain") == ImportanceMode::Gain);
  CHECK(to_string(ImportanceMode::Weight) == "weight");
}

TEST_CASE("weight importance equals nodes referencing each feature") {
  const Dataset d = separable_dataset(800, 5);
  BoostParams p;
  p.n_estimators = 20;
  p.max_depth = 4;
  p.colsample_bytree = 0.8;
  const auto m = train_xgb(d, p);
  const auto rep = model_importance(m, "xgb");
  std::vector<double> count(d.cols(), 0.0);
  double gain_total = 0.0;
  for (const auto& t : m.trees) {
    for (const auto& n : t.nodes()) {
      if (n.feature >= 0) {
        count[static_cast<std::size_t>(n.feature)] += 1;
        gain_total += n.gain;
      }
    }
  }
  CHECK(rep.weight == count);
  double g = 0.0;
  for (double v : rep.gain) g += v;
  CHECK(g == doctest::Approx(gain_total));

  ForestParams fp;
  fp.n_estimators = 5;
  const auto f = train_forest(d, fp);
  const auto frep = model_importance(f);
  CHECK_FALSE(frep.empty());
  CHECK(thrown([] { model_importance(GbdtModel{}); }) == ErrorKind::UntrainedModel);
  CHECK(thrown([] { model_importance(ForestModel{}); }) == ErrorKind::UntrainedModel);

  std::ostringstream csv;
  write_importance_csv(csv, rep);
  CHECK(csv.str().find("f0") != std::string::npos);
  CHECK(to_json(rep)["model"] == "xgb");
}
