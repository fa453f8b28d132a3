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

#include "edgebot/model.hpp"

#include <charconv>
#include <cmath>

#include <nlohmann/json.hpp>

#include "edgebot/error.hpp"
#include "edgebot/numfmt.hpp"

namespace edgebot {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Rf: return "rf";
    case ModelKind::Xgb: return "xgb";
    case ModelKind::Lgbm: return "lgbm";
  }
  return "rf";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "rf") return ModelKind::Rf;
  if (s == "xgb") return ModelKind::Xgb;
  if (s == "lgbm") return ModelKind::Lgbm;
  throw Error(ErrorKind::InvalidConfig, "unknown model kind '" + std::string(s) + "' (rf, xgb, lgbm)");
}

HyperParams HyperParams::reference(ModelKind kind) {
  HyperParams hp;
  hp.kind = kind;
  switch (kind) {
    case ModelKind::Rf:
      hp.max_depth = 6;
      hp.n_estimators = 100;
      hp.min_samples_split = 10;
      hp.min_samples_leaf = 4;
      hp.max_features = "sqrt";
      break;
    case ModelKind::Xgb:
      hp.max_depth = 6;
      hp.n_estimators = 100;
      hp.subsample = 1.0;
      hp.learning_rate = 0.1;
      hp.colsample_bytree = 0.8;
      hp.gamma = 0.1;
      break;
    case ModelKind::Lgbm:
      hp.max_depth = 5;
      hp.n_estimators = 200;
      hp.min_child_samples = 20;
      hp.subsample = 0.9;
      hp.learning_rate = 0.01;
      hp.num_leaves = 31;
      hp.reg_alpha = 1.0;
      hp.reg_lambda = 0.0;
      hp.colsample_bytree = 0.9;
      break;
  }
  return hp;
}

namespace {

struct FieldRule {
  const char* name;
  bool rf, xgb, lgbm;
};

// Which fields each model kind accepts.
constexpr FieldRule kRules[] = {
    {"max_depth", true, true, true},          {"n_estimators", true, true, true},
    {"min_samples_split", true, false, false}, {"min_samples_leaf", true, false, false},
    {"max_features", true, false, false},      {"min_child_samples", false, false, true},
    {"subsample", false, true, true},          {"learning_rate", false, true, true},
    {"num_leaves", false, false, true},        {"reg_alpha", false, false, true},
    {"reg_lambda", false, false, true},        {"colsample_bytree", false, true, true},
    {"gamma", false, true, false},
};

bool allowed(ModelKind kind, std::string_view field) {
  for (const auto& r : kRules) {
    if (field == r.name) {
      return kind == ModelKind::Rf ? r.rf : kind == ModelKind::Xgb ? r.xgb : r.lgbm;
    }
  }
  return false;
}

// Visits every set field as (name, json value).
template <class Fn>
void for_each_set(const HyperParams& hp, Fn&& fn) {
  if (hp.max_depth) fn("max_depth", nlohmann::json(*hp.max_depth));
  if (hp.n_estimators) fn("n_estimators", nlohmann::json(*hp.n_estimators));
  if (hp.min_samples_split) fn("min_samples_split", nlohmann::json(*hp.min_samples_split));
  if (hp.min_samples_leaf) fn("min_samples_leaf", nlohmann::json(*hp.min_samples_leaf));
  if (hp.max_features) fn("max_features", nlohmann::json(*hp.max_features));
  if (hp.min_child_samples) fn("min_child_samples", nlohmann::json(*hp.min_child_samples));
  if (hp.subsample) fn("subsample", nlohmann::json(*hp.subsample));
  if (hp.learning_rate) fn("learning_rate", nlohmann::json(*hp.learning_rate));
  if (hp.num_leaves) fn("num_leaves", nlohmann::json(*hp.num_leaves));
  if (hp.reg_alpha) fn("reg_alpha", nlohmann::json(*hp.reg_alpha));
  if (hp.reg_lambda) fn("reg_lambda", nlohmann::json(*hp.reg_lambda));
  if (hp.colsample_bytree) fn("colsample_bytree", nlohmann::json(*hp.colsample_bytree));
  if (hp.gamma) fn("gamma", nlohmann::json(*hp.gamma));
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorKind::InvalidParams, msg); }

}  // namespace

void HyperParams::validate() const {
  for_each_set(*this, [&](const char* name, const nlohmann::json&) {
    if (!allowed(kind, name)) {
      invalid(std::string(name) + " does not apply to " + std::string(to_string(kind)));
    }
  });
  if (max_depth && *max_depth < 0) invalid("max_depth must be >= 0");
  if (n_estimators && *n_estimators < 1) invalid("n_estimators must be >= 1");
  if (min_samples_split && !(*min_samples_split >= 2)) invalid("min_samples_split must be >= 2");
  if (min_samples_leaf && !(*min_samples_leaf >= 1)) invalid("min_samples_leaf must be >= 1");
  if (max_features && *max_features != "sqrt" && *max_features != "all") {
    invalid("max_features must be sqrt or all");
  }
  if (min_child_samples && !(*min_child_samples >= 1)) invalid("min_child_samples must be >= 1");
  if (subsample && !(*subsample > 0 && *subsample <= 1)) invalid("subsample must lie in (0, 1]");
  if (learning_rate && !(*learning_rate >= 0 && std::isfinite(*learning_rate))) {
    invalid("learning_rate must be >= 0");
  }
  if (num_leaves && *num_leaves < 2) invalid("num_leaves must be >= 2");
  if (reg_alpha && !(*reg_alpha >= 0)) invalid("reg_alpha must be >= 0");
  if (reg_lambda && !(*reg_lambda >= 0)) invalid("reg_lambda must be >= 0");
  if (colsample_bytree && !(*colsample_bytree > 0 && *colsample_bytree <= 1)) {
    invalid("colsample_bytree must lie in (0, 1]");
  }
  if (gamma && !(*gamma >= 0)) invalid("gamma must be >= 0");
}

nlohmann::json to_json(const HyperParams& hp) {
  nlohmann::json j;
  j["model"] = std::string(to_string(hp.kind));
  for_each_set(hp, [&](const char* name, const nlohmann::json& v) { j[name] = v; });
  return j;
}

void set_field(HyperParams& hp, std::string_view field, std::string_view value) {
  auto as_int = [&]() {
    int v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size()) {
      throw Error(ErrorKind::InvalidConfig,
                  "field " + std::string(field) + ": '" + std::string(value) + "' is not an integer");
    }
    return v;
  };
  auto as_double = [&]() {
    auto v = parse_double(value);
    if (!v) {
      throw Error(ErrorKind::InvalidConfig,
                  "field " + std::string(field) + ": '" + std::string(value) + "' is not a number");
    }
    return *v;
  };
  if (field == "model") hp.kind = model_kind_from_string(value);
  else if (field == "max_depth") hp.max_depth = as_int();
  else if (field == "n_estimators") hp.n_estimators = as_int();
  else if (field == "min_samples_split") hp.min_samples_split = as_double();
  else if (field == "min_samples_leaf") hp.min_samples_leaf = as_double();
  else if (field == "max_features") hp.max_features = std::string(value);
  else if (field == "min_child_samples") hp.min_child_samples = as_double();
  else if (field == "subsample") hp.subsample = as_double();
  else if (field == "learning_rate") hp.learning_rate = as_double();
  else if (field == "num_leaves") hp.num_leaves = as_int();
  else if (field == "reg_alpha") hp.reg_alpha = as_double();
  else if (field == "reg_lambda") hp.reg_lambda = as_double();
  else if (field == "colsample_bytree") hp.colsample_bytree = as_double();
  else if (field == "gamma") hp.gamma = as_double();
  else throw Error(ErrorKind::InvalidConfig, "unknown hyperparameter '" + std::string(field) + "'");
}

HyperParams hyper_params_from_json(const nlohmann::json& j) {
  HyperParams hp;
  hp.kind = model_kind_from_string(j.at("model").get<std::string>());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "model") continue;
    const auto& v = it.value();
    set_field(hp, it.key(), v.is_string() ? v.get<std::string>() : v.dump());
  }
  return hp;
}

ForestParams forest_params(const HyperParams& hp, const TrainOptions& options) {
  if (hp.kind != ModelKind::Rf) invalid("forest parameters requested for a boosting model");
  hp.validate();
  ForestParams p;
  // Library defaults for unset fields: unbounded depth, split 2, leaf 1.
  p.max_depth = hp.max_depth.value_or(64);
  p.n_estimators = hp.n_estimators.value_or(100);
  p.min_samples_split = hp.min_samples_split.value_or(2);
  p.min_samples_leaf = hp.min_samples_leaf.value_or(1);
  p.max_features = hp.max_features.value_or("sqrt") == "all" ? MaxFeatures::All : MaxFeatures::Sqrt;
  p.seed = options.seed;
  p.threads = options.threads;
  return p;
}

BoostParams boost_params(const HyperParams& hp, const TrainOptions& options) {
  if (hp.kind == ModelKind::Rf) invalid("boosting parameters requested for a forest model");
  hp.validate();
  BoostParams p;
  p.seed = options.seed;
  if (hp.kind == ModelKind::Xgb) {
    p.mode = BoostMode::Xgb;
    p.max_depth = hp.max_depth.value_or(6);
    p.n_estimators = hp.n_estimators.value_or(100);
    p.learning_rate = hp.learning_rate.value_or(0.3);
    p.subsample = hp.subsample.value_or(1.0);
    p.colsample_bytree = hp.colsample_bytree.value_or(1.0);
    p.gamma = hp.gamma.value_or(0.0);
    p.reg_lambda = 1.0;
    p.reg_alpha = 0.0;
    p.min_child_weight = 1.0;
    p.min_child_samples = 1;
    p.goss.enabled = false;
    p.use_efb = false;
  } else {
    p.mode = BoostMode::Lgbm;
    p.max_depth = hp.max_depth.value_or(64);
    p.n_estimators = hp.n_estimators.value_or(100);
    p.learning_rate = hp.learning_rate.value_or(0.1);
    p.num_leaves = static_cast<std::size_t>(hp.num_leaves.value_or(31));
    p.min_child_samples = hp.min_child_samples.value_or(20);
    p.min_child_weight = 1e-3;
    p.subsample = hp.subsample.value_or(1.0);
    p.colsample_bytree = hp.colsample_bytree.value_or(1.0);
    p.reg_alpha = hp.reg_alpha.value_or(0.0);
    p.reg_lambda = hp.reg_lambda.value_or(0.0);
    p.gamma = 0.0;
  }
  if (options.tree_method) p.tree_method = *options.tree_method;
  if (options.goss) p.goss = *options.goss;
  if (options.use_efb) p.use_efb = *options.use_efb;
  return p;
}

const std::vector<std::string>& Model::feature_names() const {
  return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.feature_names; },
                    impl);
}

std::uint8_t Model::predict(std::span<const double> x) const {
  if (const auto* f = std::get_if<ForestModel>(&impl)) return f->predict_class(x).label;
  return std::get<GbdtModel>(impl).predict_class(x);
}

double Model::score(std::span<const double> x) const {
  if (const auto* f = std::get_if<ForestModel>(&impl)) return f->score(x);
  return std::get<GbdtModel>(impl).predict_proba(x);
}

std::vector<std::uint8_t> Model::predict_batch(const Dataset& data) const {
  if (data.cols() != feature_names().size()) {
    throw Error(ErrorKind::FeatureIndexOutOfRange,
                "dataset has " + std::to_string(data.cols()) + " features, model expects " +
                    std::to_string(feature_names().size()));
  }
  std::vector<std::uint8_t> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) out[i] = predict(data.row(i));
  return out;
}

Model train_model(const Dataset& train, const HyperParams& hp, const TrainOptions& options) {
  Model m;
  m.kind = hp.kind;
  m.hyper = hp;
  if (hp.kind == ModelKind::Rf) {
    m.impl = train_forest(train, forest_params(hp, options));
  } else {
    m.impl = train_boosting(train, boost_params(hp, options));
  }
  return m;
}

}  // namespace edgebot
