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

#include "edgebot/tuning_eval.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "edgebot/artifact.hpp"
#include "edgebot/error.hpp"
#include "edgebot/numfmt.hpp"

namespace edgebot {

// ---------------------------------------------------------------------------
// Metrics

ConfusionMatrix confusion(std::span<const std::uint8_t> predicted,
                          std::span<const std::uint8_t> actual) {
  if (predicted.size() != actual.size()) {
    throw Error(ErrorKind::LengthMismatch, "predictions and labels differ in length");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++cm.tp;
    else if (p) ++cm.fp;
    else if (a) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metrics metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorKind::EmptyMatrix, "confusion matrix is empty");
  Metrics m;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp);
  m.recall = ratio(cm.tp, cm.tp + cm.fn);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp);
  m.fnr = ratio(cm.fn, cm.fn + cm.tp);
  m.fpr = ratio(cm.fp, cm.fp + cm.tn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

double detection_probability(std::span<const std::uint8_t> predicted,
                             std::span<const std::uint8_t> actual) {
  const auto cm = confusion(predicted, actual);
  if (cm.tp + cm.fn == 0) throw Error(ErrorKind::NoPositiveRows, "no Attack rows to detect");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

double detection_probability(const Model& model, const Dataset& test) {
  const auto pred = model.predict_batch(test);
  return detection_probability(pred, test.labels);
}

// ---------------------------------------------------------------------------
// Noise

NoiseSpec noise_spec(const Dataset& train, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidParams, "noise sigma must be >= 0");
  NoiseSpec s;
  s.sigma = sigma;
  s.seed = seed;
  s.train_std.assign(train.cols(), 0.0);
  const double n = static_cast<double>(train.rows());
  if (train.rows() == 0) return s;
  for (std::size_t j = 0; j < train.cols(); ++j) {
    if (train.feature_kinds[j] == FeatureKind::Bit) continue;
    double mean = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) mean += train.at(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      const double d = train.at(i, j) - mean;
      var += d * d;
    }
    s.train_std[j] = std::sqrt(var / n);
  }
  return s;
}

Dataset inject_noise(const Dataset& data, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw Error(ErrorKind::InvalidParams, "noise sigma must be >= 0");
  if (spec.train_std.size() != data.cols()) {
    throw Error(ErrorKind::LengthMismatch, "noise spec width does not match dataset");
  }
  Dataset out = data;
  if (spec.sigma == 0.0) return out;
  Rng rng(spec.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      if (out.feature_kinds[j] == FeatureKind::Bit) continue;
      const double scale = spec.sigma * spec.train_std[j];
      const double e = z(rng);
      if (scale > 0.0) out.at(i, j) += scale * e;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

EvalReport evaluate(const Model& model, const Dataset& data, const std::string& split) {
  EvalReport r;
  r.model = std::string(to_string(model.kind));
  r.split = split;
  r.dataset = hex64(fingerprint(data));
  r.rows = data.rows();
  if (data.rows() == 0) return r;
  const auto pred = model.predict_batch(data);
  r.confusion = confusion(pred, data.labels);
  r.metrics = metrics(*r.confusion);
  if (r.confusion->tp + r.confusion->fn > 0) r.detection_probability = *r.metrics.recall;
  return r;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["model"] = r.model;
  if (!r.model_id.empty()) j["model_id"] = r.model_id;
  j["split"] = r.split;
  j["dataset"] = r.dataset;
  j["rows"] = r.rows;
  if (r.confusion) {
    j["confusion"] = {{"tp", r.confusion->tp}, {"fp", r.confusion->fp},
                      {"fn", r.confusion->fn}, {"tn", r.confusion->tn}};
  } else {
    j["confusion"] = nullptr;
  }
  j["metrics"] = {{"accuracy", opt(r.metrics.accuracy)},
                  {"precision", opt(r.metrics.precision)},
                  {"recall", opt(r.metrics.recall)},
                  {"f1", opt(r.metrics.f1)},
                  {"specificity", opt(r.metrics.specificity)},
                  {"fnr", opt(r.metrics.fnr)},
                  {"fpr", opt(r.metrics.fpr)}};
  j["detection_probability"] = {{"value", opt(r.detection_probability)},
                                {"definition", "recall on Attack rows of this split"}};
  if (r.noise) {
    j["noise"] = {{"distribution", "gaussian"},
                  {"sigma", r.noise->sigma},
                  {"seed", r.noise->seed},
                  {"scope", "numeric columns, sigma x training std"}};
  }
  if (r.train_seconds) j["train_seconds"] = *r.train_seconds;
  if (r.infer_seconds) j["infer_seconds"] = *r.infer_seconds;
  if (r.model_bytes) j["model_bytes"] = *r.model_bytes;
  if (r.host) j["host"] = *r.host;
  return j;
}

std::string report_json(const EvalReport& report) { return to_json(report).dump(2) + "\n"; }

std::string format_table(const std::vector<EvalReport>& reports) {
  const std::vector<std::string> header{"model", "split",   "rows",    "accuracy", "precision",
                                        "recall", "f1",     "det_prob", "train_s", "infer_s",
                                        "size_mb"};
  auto pct = [](const std::optional<double>& v) -> std::string {
    if (!v) return "undef";
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << *v * 100.0;
    return s.str();
  };
  auto fixed = [](std::optional<double> v, int digits) -> std::string {
    if (!v) return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << *v;
    return s.str();
  };
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& r : reports) {
    std::optional<double> mb;
    if (r.model_bytes) mb = static_cast<double>(*r.model_bytes) / (1024.0 * 1024.0);
    rows.push_back({r.model, r.split, std::to_string(r.rows), pct(r.metrics.accuracy),
                    pct(r.metrics.precision), pct(r.metrics.recall), pct(r.metrics.f1),
                    pct(r.detection_probability), fixed(r.train_seconds, 3),
                    fixed(r.infer_seconds, 3), fixed(mb, 2)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out << "  ";
      // Text columns left-aligned, numbers right-aligned.
      if (c < 2) out << std::left; else out << std::right;
      out << std::setw(static_cast<int>(width[c])) << rows[r][c];
    }
    out << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << "\n";
    }
  }
  return out.str();
}

std::string host_identity() {
  utsname u{};
  std::string id = "unknown";
  if (uname(&u) == 0) id = std::string(u.sysname) + " " + u.release + " " + u.machine;
  return id + ", " + std::to_string(std::thread::hardware_concurrency()) + " hw threads";
}

// ---------------------------------------------------------------------------
// Random search

namespace {

std::vector<std::string> strs(std::initializer_list<const char*> v) { return {v.begin(), v.end()}; }

}  // namespace

ParamSpace ParamSpace::around_reference(ModelKind kind, int n_iter, std::uint64_t seed) {
  ParamSpace s;
  s.kind = kind;
  s.n_iter = n_iter;
  s.seed = seed;
  switch (kind) {
    case ModelKind::Rf:
      s.fields["max_depth"] = ChoiceDomain{strs({"4", "6", "8", "10", "12"})};
      s.fields["n_estimators"] = ChoiceDomain{strs({"50", "100", "150"})};
      s.fields["min_samples_split"] = ChoiceDomain{strs({"2", "5", "10"})};
      s.fields["min_samples_leaf"] = ChoiceDomain{strs({"1", "2", "4"})};
      s.fields["max_features"] = ChoiceDomain{strs({"sqrt"})};
      break;
    case ModelKind::Xgb:
      s.fields["max_depth"] = ChoiceDomain{strs({"4", "6", "8"})};
      s.fields["n_estimators"] = ChoiceDomain{strs({"50", "100", "200"})};
      s.fields["subsample"] = ChoiceDomain{strs({"0.8", "1.0"})};
      s.fields["learning_rate"] = ChoiceDomain{strs({"0.05", "0.1", "0.2"})};
      s.fields["colsample_bytree"] = ChoiceDomain{strs({"0.8", "1.0"})};
      s.fields["gamma"] = ChoiceDomain{strs({"0", "0.1", "0.3"})};
      break;
    case ModelKind::Lgbm:
      s.fields["max_depth"] = ChoiceDomain{strs({"5", "7"})};
      s.fields["n_estimators"] = ChoiceDomain{strs({"100", "200"})};
      s.fields["min_child_samples"] = ChoiceDomain{strs({"10", "20", "40"})};
      s.fields["subsample"] = ChoiceDomain{strs({"0.8", "0.9", "1.0"})};
      s.fields["learning_rate"] = ChoiceDomain{strs({"0.01", "0.05", "0.1"})};
      s.fields["num_leaves"] = ChoiceDomain{strs({"15", "31", "63"})};
      s.fields["reg_alpha"] = ChoiceDomain{strs({"0", "1.0"})};
      s.fields["reg_lambda"] = ChoiceDomain{strs({"0", "1.0"})};
      s.fields["colsample_bytree"] = ChoiceDomain{strs({"0.8", "0.9", "1.0"})};
      break;
  }
  return s;
}

void ParamSpace::validate() const {
  if (n_iter < 1) throw Error(ErrorKind::InvalidConfig, "n_iter must be >= 1");
  for (const auto& [name, domain] : fields) {
    auto check = [&](const std::string& value) {
      HyperParams hp;
      hp.kind = kind;
      try {
        set_field(hp, name, value);
        hp.validate();
      } catch (const Error& e) {
        throw Error(ErrorKind::InvalidConfig, "search space field " + name + ": " + e.what());
      }
    };
    if (const auto* c = std::get_if<ChoiceDomain>(&domain)) {
      if (c->values.empty()) throw Error(ErrorKind::InvalidConfig, "field " + name + " has no candidates");
      for (const auto& v : c->values) check(v);
    } else {
      const auto& r = std::get<RangeDomain>(domain);
      if (!(r.lo <= r.hi)) throw Error(ErrorKind::InvalidConfig, "field " + name + " has lo > hi");
      if (r.integer && std::ceil(r.lo) > std::floor(r.hi)) {
        throw Error(ErrorKind::InvalidConfig, "field " + name + " has no integer in range");
      }
      check(r.integer ? std::to_string(static_cast<long long>(std::ceil(r.lo))) : format_double(r.lo));
      check(r.integer ? std::to_string(static_cast<long long>(std::floor(r.hi))) : format_double(r.hi));
    }
  }
}

ParamSpace param_space_from_json(const nlohmann::json& j) {
  ParamSpace s;
  s.kind = model_kind_from_string(j.at("model").get<std::string>());
  s.n_iter = j.value("n_iter", 10);
  s.seed = j.value("seed", std::uint64_t{0});
  for (auto it = j.at("fields").begin(); it != j.at("fields").end(); ++it) {
    const auto& v = it.value();
    if (v.is_array()) {
      ChoiceDomain c;
      for (const auto& e : v) c.values.push_back(e.is_string() ? e.get<std::string>() : e.dump());
      s.fields[it.key()] = c;
    } else {
      s.fields[it.key()] =
          RangeDomain{v.at("lo").get<double>(), v.at("hi").get<double>(), v.value("integer", false)};
    }
  }
  return s;
}

HyperParams draw(const ParamSpace& space, Rng& rng) {
  HyperParams hp;
  hp.kind = space.kind;
  for (const auto& [name, domain] : space.fields) {
    std::string value;
    if (const auto* c = std::get_if<ChoiceDomain>(&domain)) {
      std::uniform_int_distribution<std::size_t> pick(0, c->values.size() - 1);
      value = c->values[pick(rng)];
    } else {
      const auto& r = std::get<RangeDomain>(domain);
      if (r.integer) {
        std::uniform_int_distribution<long long> pick(static_cast<long long>(std::ceil(r.lo)),
                                                      static_cast<long long>(std::floor(r.hi)));
        value = std::to_string(pick(rng));
      } else {
        std::uniform_real_distribution<double> pick(r.lo, r.hi);
        value = format_double(pick(rng));
      }
    }
    set_field(hp, name, value);
  }
  return hp;
}

SearchResult random_search(const ParamSpace& space, const Dataset& train,
                           const Dataset& validation, const TrainOptions& options,
                           SearchMetric metric) {
  space.validate();
  Rng rng(space.seed);
  SearchResult result;
  std::optional<double> best;
  for (int i = 0; i < space.n_iter; ++i) {
    Trial t;
    t.index = static_cast<std::size_t>(i);
    t.params = draw(space, rng);
    try {
      const Model m = train_model(train, t.params, options);
      const auto pred = m.predict_batch(validation);
      const auto mt = metrics(confusion(pred, validation.labels));
      const auto s = metric == SearchMetric::Accuracy ? mt.accuracy : mt.f1;
      t.score = s.value_or(0.0);
    } catch (const Error& e) {
      t.error = e.what();
    }
    if (t.score && (!best || *t.score > *best)) {
      best = t.score;
      result.best = t.params;
      result.best_index = t.index;
      result.best_score = *t.score;
    }
    result.trials.push_back(std::move(t));
  }
  if (!best) throw Error(ErrorKind::InvalidConfig, "every search trial failed");
  return result;
}

void write_trial_log(std::ostream& out, const std::vector<Trial>& trials) {
  for (const auto& t : trials) {
    nlohmann::json j;
    j["index"] = t.index;
    j["params"] = to_json(t.params);
    j["score"] = t.score ? nlohmann::json(*t.score) : nlohmann::json(nullptr);
    if (!t.error.empty()) j["error"] = t.error;
    out << j.dump() << "\n";
  }
}

// ---------------------------------------------------------------------------
// Benchmark

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

EvalReport benchmark(const HyperParams& hp, const Dataset& train, const Dataset& test,
                     const TrainOptions& options, int repeats) {
  if (repeats < 1) throw Error(ErrorKind::InvalidParams, "repeats must be >= 1");
  using Clock = std::chrono::steady_clock;
  std::vector<double> train_times, infer_times;
  std::optional<Model> first;
  std::vector<std::uint8_t> pred;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    Model m = train_model(train, hp, options);
    const auto t1 = Clock::now();
    pred.assign(test.rows(), 0);
    for (std::size_t i = 0; i < test.rows(); ++i) pred[i] = m.predict(test.row(i));
    const auto t2 = Clock::now();
    train_times.push_back(std::chrono::duration<double>(t1 - t0).count());
    infer_times.push_back(test.rows() ? std::chrono::duration<double>(t2 - t1).count() : 0.0);
    if (!first) first = std::move(m);
  }
  EvalReport report = evaluate(*first, test, "test");
  Artifact a{*first, std::nullopt, {options.seed, fingerprint(train), train.rows()}, 0};
  report.model_bytes = serialize(a).size();
  report.model_id = a.id();
  report.train_seconds = median(train_times);
  report.infer_seconds = median(infer_times);
  report.host = host_identity();
  return report;
}

}  // namespace edgebot
