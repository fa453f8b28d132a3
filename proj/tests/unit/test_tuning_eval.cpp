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

#include "edgebot/preprocess.hpp"
#include "edgebot/synthetic.hpp"
#include "edgebot/tuning_eval.hpp"
#include "support.hpp"

using namespace edgebot;
using support::thrown;

namespace {

// Label = parity of three bit columns; two noise columns.
Dataset parity_dataset(std::size_t rows, std::uint64_t seed) {
  Dataset d;
  d.feature_names = {"a", "b", "c", "n0", "n1"};
  d.feature_kinds.assign(5, FeatureKind::Numeric);
  Rng rng(seed);
  std::bernoulli_distribution bit(0.5);
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < rows; ++i) {
    const int a = bit(rng), b = bit(rng), c = bit(rng);
    d.values.insert(d.values.end(), {double(a), double(b), double(c), z(rng), z(rng)});
    d.labels.push_back(static_cast<std::uint8_t>(a ^ b ^ c));
  }
  return d;
}

}  // namespace

TEST_CASE("confusion examples and oracle") {
  std::vector<std::uint8_t> y(20), all(20, 1);
  for (std::size_t i = 0; i < 20; ++i) y[i] = i < 10;
  CHECK(confusion(y, y) == ConfusionMatrix{10, 0, 0, 10});
  CHECK(confusion(all, y) == ConfusionMatrix{10, 10, 0, 0});
  CHECK(thrown([&] { confusion(std::vector<std::uint8_t>(3), y); }) == ErrorKind::LengthMismatch);

  Rng rng(1);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::uint8_t> p(57), a(57);
    std::size_t cell[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = coin(rng);
      a[i] = coin(rng);
      ++cell[p[i]][a[i]];
    }
    CHECK(confusion(p, a) == ConfusionMatrix{cell[1][1], cell[1][0], cell[0][1], cell[0][0]});
  }
}

TEST_CASE("metric examples") {
  const auto m = metrics({90, 10, 10, 90});
  CHECK(*m.precision == doctest::Approx(0.9));
  CHECK(*m.recall == doctest::Approx(0.9));
  CHECK(*m.f1 == doctest::Approx(0.9));
  CHECK(*m.accuracy == doctest::Approx(0.9));
  CHECK(*metrics({5, 0, 3, 2}).precision == 1.0);
  const auto none = metrics({0, 4, 0, 6});
  CHECK_FALSE(none.recall.has_value());
  CHECK_FALSE(none.fnr.has_value());
  CHECK_FALSE(none.f1.has_value());
  CHECK(*none.precision == 0.0);
  CHECK(thrown([] { metrics({}); }) == ErrorKind::EmptyMatrix);
}

TEST_CASE("metric identities on random confusion matrices") {
  Rng rng(2);
  std::uniform_int_distribution<std::size_t> cnt(0, 1000);
  int checked = 0;
  for (int t = 0; t < 10000; ++t) {
    const ConfusionMatrix cm{cnt(rng), cnt(rng), cnt(rng), cnt(rng)};
    if (cm.total() == 0) continue;
    const auto m = metrics(cm);
    for (const auto& v : {m.accuracy, m.precision, m.recall, m.f1, m.specificity, m.fnr, m.fpr}) {
      if (v) CHECK((*v >= 0.0 && *v <= 1.0));
    }
    if (m.precision && m.recall && m.f1) {
      const double h = 2.0 / (1.0 / *m.precision + 1.0 / *m.recall);
      CHECK(std::fabs(*m.f1 - h) <= 1e-12);
    }
    if (m.recall) CHECK(std::fabs(*m.fnr - (1.0 - *m.recall)) <= 1e-12);
    if (m.specificity) CHECK(std::fabs(*m.fpr - (1.0 - *m.specificity)) <= 1e-12);
    ++checked;
  }
  CHECK(checked > 9990);
}

TEST_CASE("detection probability") {
  std::vector<std::uint8_t> y{1, 1, 0, 1, 0};
  CHECK(detection_probability(y, y) == 1.0);
  CHECK(detection_probability(std::vector<std::uint8_t>(5, 0), y) == 0.0);
  const std::vector<std::uint8_t> p{1, 0, 0, 1, 1};
  CHECK(detection_probability(p, y) == *metrics(confusion(p, y)).recall);
  CHECK(thrown([] {
          detection_probability(std::vector<std::uint8_t>{1, 0}, std::vector<std::uint8_t>{0, 0});
        }) == ErrorKind::NoPositiveRows);

  const Dataset d = separable_dataset(1000, 3);
  const auto s = split(d, 3);
  const Model m = train_model(s.train, HyperParams::reference(ModelKind::Xgb), {});
  const auto r = evaluate(m, s.test, "test");
  CHECK(detection_probability(m, s.test) == *r.metrics.recall);
  CHECK(*r.detection_probability == *r.metrics.recall);
}

TEST_CASE("noise injection") {
  Dataset d = separable_dataset(10000, 4);
  const Dataset original = d;
  SUBCASE("sigma 0 is the identity") {
    const auto spec = noise_spec(d, 0.0, 1);
    const Dataset same = inject_noise(d, spec);
    CHECK(same.values == d.values);
  }
  SUBCASE("moments on a standardized column, bits untouched") {
    const Dataset z = apply_scaler(fit_scaler(d), d);
    const auto spec = noise_spec(z, 0.1, 7);
    const Dataset noisy = inject_noise(z, spec);
    for (std::size_t j = 0; j < z.cols(); ++j) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < z.rows(); ++i) {
        const double e = noisy.at(i, j) - z.at(i, j);
        mean += e;
        sq += e * e;
      }
      mean /= z.rows();
      const double sd = std::sqrt(sq / z.rows() - mean * mean);
      if (z.feature_kinds[j] == FeatureKind::Bit) {
        CHECK(sd == 0.0);
        for (std::size_t i = 0; i < z.rows(); ++i) CHECK(noisy.at(i, j) == z.at(i, j));
      } else {
        CHECK(std::fabs(sd - 0.1) <= 0.01);
      }
    }
    CHECK(inject_noise(z, spec).values == noisy.values);
    CHECK(d.values == original.values);
  }
  CHECK(thrown([&] { noise_spec(d, -0.5, 1); }) == ErrorKind::InvalidParams);
}

TEST_CASE("noise lowers accuracy on average") {
  const Dataset d = separable_dataset(4000, 5);
  const auto s = split(d, 5);
  const Model m = train_model(s.train, HyperParams::reference(ModelKind::Lgbm), {});
  const double clean = *evaluate(m, s.test, "test").metrics.accuracy;
  double noisy = 0.0;
  for (std::uint64_t k = 0; k < 10; ++k) {
    noisy += *evaluate(m, inject_noise(s.test, noise_spec(s.train, 0.1, k)), "t").metrics.accuracy;
  }
  CHECK(noisy / 10 < clean);
}

TEST_CASE("reports") {
  const Dataset d = separable_dataset(600, 6);
  const auto s = split(d, 6);
  const Model m = train_model(s.train, HyperParams::reference(ModelKind::Rf), {});
  EvalReport r = evaluate(m, s.test, "test");
  const std::string a = report_json(r);
  CHECK(a == report_json(evaluate(m, s.test, "test")));
  CHECK(a.back() == '\n');
  const auto j = nlohmann::json::parse(a);
  CHECK(j["detection_probability"]["definition"].get<std::string>().find("recall") != std::string::npos);
  // Keys come out sorted.
  std::string prev;
  for (auto it = j.begin(); it != j.end(); ++it) {
    CHECK(prev < it.key());
    prev = it.key();
  }

  Dataset benign = s.test;
  std::fill(benign.labels.begin(), benign.labels.end(), 0);
  const auto rb = evaluate(m, benign, "benign");
  CHECK_FALSE(rb.detection_probability.has_value());
  const auto jb = to_json(rb);
  CHECK(jb["metrics"]["recall"].is_null());
  CHECK(format_table({r, rb}).find("undef") != std::string::npos);
  CHECK_FALSE(host_identity().empty());
}

TEST_CASE("search space") {
  auto space = ParamSpace::around_reference(ModelKind::Rf, 5, 1);
  space.validate();
  Rng rng(1);
  for (int k = 0; k < 50; ++k) draw(space, rng).validate();

  ParamSpace bad = space;
  bad.fields["gamma"] = ChoiceDomain{{"0.1"}};
  CHECK(thrown([&] { bad.validate(); }) == ErrorKind::InvalidConfig);
  bad = space;
  bad.n_iter = 0;
  CHECK(thrown([&] { bad.validate(); }) == ErrorKind::InvalidConfig);
  bad = space;
  bad.fields["max_depth"] = RangeDomain{3.5, 3.7, true};
  CHECK(thrown([&] { bad.validate(); }) == ErrorKind::InvalidConfig);

  const auto j = nlohmann::json::parse(R"({"model": "xgb", "n_iter": 4, "seed": 9,
      "fields": {"max_depth": [3, 5], "learning_rate": {"lo": 0.05, "hi": 0.3},
                 "n_estimators": {"lo": 10, "hi": 30, "integer": true}}})");
  const auto parsed = param_space_from_json(j);
  CHECK(parsed.kind == ModelKind::Xgb);
  CHECK(parsed.n_iter == 4);
  parsed.validate();
  Rng r2(3);
  for (int k = 0; k < 50; ++k) {
    const auto hp = draw(parsed, r2);
    CHECK((*hp.max_depth == 3 || *hp.max_depth == 5));
    CHECK((*hp.learning_rate >= 0.05 && *hp.learning_rate <= 0.3));
    CHECK((*hp.n_estimators >= 10 && *hp.n_estimators <= 30));
  }
}

TEST_CASE("random search") {
  const Dataset d = parity_dataset(1200, 7);
  const auto s = split(d, 7);
  TrainOptions opt;
  opt.seed = 3;

  SUBCASE("single draw wins") {
    auto space = ParamSpace::around_reference(ModelKind::Xgb, 1, 2);
    const auto res = random_search(space, s.train, s.validation, opt);
    REQUIRE(res.trials.size() == 1);
    CHECK(res.best == res.trials[0].params);
    CHECK(res.best_index == 0);
  }
  SUBCASE("reference row beats shallow alternatives, deterministically") {
    ParamSpace space = ParamSpace::around_reference(ModelKind::Rf, 8, 13);
    space.fields["max_depth"] = ChoiceDomain{{"1", "2", "6"}};
    space.fields["n_estimators"] = ChoiceDomain{{"100"}};
    space.fields["min_samples_split"] = ChoiceDomain{{"10"}};
    space.fields["min_samples_leaf"] = ChoiceDomain{{"4"}};
    const auto res = random_search(space, s.train, s.validation, opt);
    bool drew = false;
    for (const auto& t : res.trials) {
      drew = drew || *t.params.max_depth == 6;
      REQUIRE(t.score.has_value());
      CHECK(res.best_score >= *t.score);
    }
    REQUIRE(drew);
    CHECK(res.best == HyperParams::reference(ModelKind::Rf));
    // Earliest draw wins ties.
    for (const auto& t : res.trials) {
      if (*t.score == res.best_score) {
        CHECK(t.index == res.best_index);
        break;
      }
    }
    const auto again = random_search(space, s.train, s.validation, opt);
    std::ostringstream l1, l2;
    write_trial_log(l1, res.trials);
    write_trial_log(l2, again.trials);
    CHECK(l1.str() == l2.str());
  }
  SUBCASE("every trial failing is an error") {
    const Dataset empty = s.validation.select_rows(std::vector<std::size_t>{});
    auto space = ParamSpace::around_reference(ModelKind::Xgb, 2, 2);
    CHECK(thrown([&] { random_search(space, s.train, empty, opt); }) == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("benchmark") {
  const Dataset d = separable_dataset(800, 8);
  const auto s = split(d, 8);
  TrainOptions opt;
  opt.seed = 1;
  const auto hp = HyperParams::reference(ModelKind::Xgb);
  const auto a = benchmark(hp, s.train, s.test, opt, 3);
  const auto b = benchmark(hp, s.train, s.test, opt, 1);
  REQUIRE(a.model_bytes.has_value());
  CHECK(*a.model_bytes == *b.model_bytes);
  CHECK(a.model_id == b.model_id);
  CHECK(*a.train_seconds > 0.0);
  CHECK(a.host.has_value());

  const Dataset empty = s.test.select_rows(std::vector<std::size_t>{});
  const auto e = benchmark(hp, s.train, empty, opt, 1);
  CHECK(*e.infer_seconds == 0.0);
  CHECK_FALSE(e.metrics.accuracy.has_value());
  CHECK_FALSE(e.confusion.has_value());
}
