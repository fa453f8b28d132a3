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

#include "edgebot/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "edgebot/error.hpp"
#include "edgebot/rng.hpp"

namespace edgebot {

namespace {

std::size_t hash_features(const FlowRecord& r) {
  std::size_t h = 1469598103934665603ULL;
  auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ULL; };
  auto opt_str = [&](const std::optional<std::string>& s) {
    mix(s ? std::hash<std::string>{}(*s) : 0x5bd1e995);
  };
  mix(r.src_port);
  mix(r.dst_port);
  mix(static_cast<std::size_t>(r.proto));
  opt_str(r.service);
  mix(r.duration ? std::hash<double>{}(*r.duration) : 0x27d4eb2f);
  mix(r.orig_bytes ? *r.orig_bytes : 0x165667b1);
  mix(r.resp_bytes ? *r.resp_bytes : 0x165667b1);
  opt_str(r.conn_state);
  opt_str(r.history);
  mix(r.orig_pkts);
  mix(r.orig_ip_bytes);
  mix(r.resp_pkts);
  mix(r.resp_ip_bytes);
  mix(r.label ? static_cast<std::size_t>(*r.label) + 1 : 0);
  return h;
}

bool inconsistent(const FlowRecord& r) {
  return (r.orig_bytes && *r.orig_bytes > r.orig_ip_bytes) ||
         (r.resp_bytes && *r.resp_bytes > r.resp_ip_bytes);
}

}  // namespace

CleanResult clean(const std::vector<FlowRecord>& records) {
  CleanResult result;
  result.report.input = records.size();
  std::unordered_multimap<std::size_t, std::size_t> seen;
  seen.reserve(records.size());
  for (const auto& r : records) {
    if (inconsistent(r)) {
      ++result.report.inconsistent_dropped;
      continue;
    }
    const std::size_t h = hash_features(r);
    bool dup = false;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (result.records[it->second].same_features_and_label(r)) {
        dup = true;
        break;
      }
    }
    if (dup) {
      ++result.report.duplicates_removed;
      continue;
    }
    seen.emplace(h, result.records.size());
    result.records.push_back(r);
  }
  result.report.output = result.records.size();
  return result;
}

// ---------------------------------------------------------------------------

std::uint32_t CategoricalVocab::code(const std::optional<std::string>& value) const {
  if (!value) return 0;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == *value) return static_cast<std::uint32_t>(i + 1);
  }
  return 0;
}

int bit_width_for(std::size_t vocab_size) {
  int bits = 1;
  while ((std::size_t{1} << bits) < vocab_size + 1) ++bits;
  return bits;
}

namespace {

constexpr const char* kCategoricalFeatures[] = {"proto", "service", "conn_state", "history"};

std::optional<std::string> categorical_value(const FlowRecord& r, std::size_t which) {
  switch (which) {
    case 0: return std::string(to_string(r.proto));
    case 1: return r.service;
    case 2: return r.conn_state;
    default: return r.history;
  }
}

// Column layout: Table-1 order with each categorical expanded in place,
// followed by the three missingness indicators.
enum class Slot { SrcPort, DstPort, Cat0, Cat1, Duration, OrigBytes, RespBytes, Cat2, Cat3,
                  OrigPkts, OrigIpBytes, RespPkts, RespIpBytes, DurationMissing,
                  OrigBytesMissing, RespBytesMissing };

constexpr Slot kLayout[] = {Slot::SrcPort, Slot::DstPort, Slot::Cat0, Slot::Cat1,
                            Slot::Duration, Slot::OrigBytes, Slot::RespBytes, Slot::Cat2,
                            Slot::Cat3, Slot::OrigPkts, Slot::OrigIpBytes, Slot::RespPkts,
                            Slot::RespIpBytes, Slot::DurationMissing,
                            Slot::OrigBytesMissing, Slot::RespBytesMissing};

const char* numeric_name(Slot s) {
  switch (s) {
    case Slot::SrcPort: return "src_port";
    case Slot::DstPort: return "dst_port";
    case Slot::Duration: return "duration";
    case Slot::OrigBytes: return "orig_bytes";
    case Slot::RespBytes: return "resp_bytes";
    case Slot::OrigPkts: return "orig_pkts";
    case Slot::OrigIpBytes: return "orig_ip_bytes";
    case Slot::RespPkts: return "resp_pkts";
    case Slot::RespIpBytes: return "resp_ip_bytes";
    case Slot::DurationMissing: return "duration_missing";
    case Slot::OrigBytesMissing: return "orig_bytes_missing";
    case Slot::RespBytesMissing: return "resp_bytes_missing";
    default: return "";
  }
}

int categorical_slot(Slot s) {
  switch (s) {
    case Slot::Cat0: return 0;
    case Slot::Cat1: return 1;
    case Slot::Cat2: return 2;
    case Slot::Cat3: return 3;
    default: return -1;
  }
}

bool is_indicator(Slot s) {
  return s == Slot::DurationMissing || s == Slot::OrigBytesMissing ||
         s == Slot::RespBytesMissing;
}

double numeric_value(const FlowRecord& r, Slot s) {
  switch (s) {
    case Slot::SrcPort: return r.src_port;
    case Slot::DstPort: return r.dst_port;
    case Slot::Duration: return r.duration.value_or(0.0);
    case Slot::OrigBytes: return static_cast<double>(r.orig_bytes.value_or(0));
    case Slot::RespBytes: return static_cast<double>(r.resp_bytes.value_or(0));
    case Slot::OrigPkts: return static_cast<double>(r.orig_pkts);
    case Slot::OrigIpBytes: return static_cast<double>(r.orig_ip_bytes);
    case Slot::RespPkts: return static_cast<double>(r.resp_pkts);
    case Slot::RespIpBytes: return static_cast<double>(r.resp_ip_bytes);
    case Slot::DurationMissing: return r.duration ? 0.0 : 1.0;
    case Slot::OrigBytesMissing: return r.orig_bytes ? 0.0 : 1.0;
    case Slot::RespBytesMissing: return r.resp_bytes ? 0.0 : 1.0;
    default: return 0.0;
  }
}

}  // namespace

const CategoricalVocab& EncodingSpec::vocab(std::string_view feature) const {
  for (const auto& v : vocabs) {
    if (v.feature == feature) return v;
  }
  throw Error(ErrorKind::InvalidConfig, "no vocabulary for '" + std::string(feature) + "'");
}

std::vector<std::string> EncodingSpec::feature_names() const {
  std::vector<std::string> names;
  for (Slot s : kLayout) {
    const int c = categorical_slot(s);
    if (c < 0) {
      names.emplace_back(numeric_name(s));
      continue;
    }
    const auto& v = vocabs.at(static_cast<std::size_t>(c));
    for (int b = v.bits - 1; b >= 0; --b) names.push_back(v.feature + "_b" + std::to_string(b));
  }
  return names;
}

std::vector<FeatureKind> EncodingSpec::feature_kinds() const {
  std::vector<FeatureKind> kinds;
  for (Slot s : kLayout) {
    const int c = categorical_slot(s);
    if (c < 0) {
      kinds.push_back(is_indicator(s) ? FeatureKind::Bit : FeatureKind::Numeric);
    } else {
      kinds.insert(kinds.end(), static_cast<std::size_t>(vocabs.at(c).bits), FeatureKind::Bit);
    }
  }
  return kinds;
}

std::size_t EncodingSpec::width() const {
  std::size_t w = 12;  // 9 numerics + 3 indicators
  for (const auto& v : vocabs) w += static_cast<std::size_t>(v.bits);
  return w;
}

void EncodingSpec::encode(const FlowRecord& record, std::span<double> out) const {
  std::size_t k = 0;
  for (Slot s : kLayout) {
    const int c = categorical_slot(s);
    if (c < 0) {
      out[k++] = numeric_value(record, s);
      continue;
    }
    const auto& v = vocabs[static_cast<std::size_t>(c)];
    const std::uint32_t code = v.code(categorical_value(record, static_cast<std::size_t>(c)));
    // Most significant bit first.
    for (int b = v.bits - 1; b >= 0; --b) out[k++] = static_cast<double>((code >> b) & 1u);
  }
}

EncodingSpec fit_encoding(std::span<const FlowRecord> train) {
  EncodingSpec spec;
  for (std::size_t c = 0; c < 4; ++c) {
    CategoricalVocab v;
    v.feature = kCategoricalFeatures[c];
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& r : train) {
      auto value = categorical_value(r, c);
      if (!value) continue;
      if (seen.emplace(*value, v.categories.size()).second) v.categories.push_back(*value);
    }
    v.bits = bit_width_for(v.categories.size());
    spec.vocabs.push_back(std::move(v));
  }
  return spec;
}

Dataset apply_encoding(const EncodingSpec& spec, std::span<const FlowRecord> records) {
  Dataset data;
  data.feature_names = spec.feature_names();
  data.feature_kinds = spec.feature_kinds();
  const std::size_t p = spec.width();
  data.values.assign(records.size() * p, 0.0);
  data.labels.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    spec.encode(records[i], {data.values.data() + i * p, p});
    data.labels.push_back(records[i].label == Label::Attack ? 1 : 0);
  }
  return data;
}

// ---------------------------------------------------------------------------

ScalerParams fit_scaler(const Dataset& train) {
  ScalerParams params;
  const std::size_t p = train.cols();
  const std::size_t n = train.rows();
  params.feature_names = train.feature_names;
  params.mean.assign(p, 0.0);
  params.stddev.assign(p, 1.0);
  params.applies.assign(p, false);
  for (std::size_t j = 0; j < p; ++j) {
    if (train.feature_kinds[j] != FeatureKind::Numeric) continue;
    params.applies[j] = true;
    if (n == 0) continue;
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += train.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = train.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    params.mean[j] = mean;
    params.stddev[j] = std::max(std::sqrt(var), ScalerParams::kStdFloor);
  }
  return params;
}

Dataset apply_scaler(const ScalerParams& params, const Dataset& data) {
  if (params.mean.size() != data.cols()) {
    throw Error(ErrorKind::InvalidConfig, "scaler width does not match dataset");
  }
  Dataset out = data;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) = params.forward(j, data.at(i, j));
  }
  return out;
}

Dataset invert_scaler(const ScalerParams& params, const Dataset& data) {
  Dataset out = data;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) = params.inverse(j, data.at(i, j));
  }
  return out;
}

// ---------------------------------------------------------------------------

SplitIndices split_indices(std::span<const std::uint8_t> labels, std::uint64_t seed) {
  if (labels.size() < 10) {
    throw Error(ErrorKind::TooFewRows,
                "need at least 10 rows to split, have " + std::to_string(labels.size()));
  }
  Rng rng(seed);
  SplitIndices out;
  for (std::uint8_t cls : {std::uint8_t{0}, std::uint8_t{1}}) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) pool.push_back(i);
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const auto n = static_cast<double>(pool.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * 0.64));
    const auto n_train_val = static_cast<std::size_t>(std::llround(n * 0.80));
    out.train.insert(out.train.end(), pool.begin(), pool.begin() + n_train);
    out.validation.insert(out.validation.end(), pool.begin() + n_train,
                          pool.begin() + n_train_val);
    out.test.insert(out.test.end(), pool.begin() + n_train_val, pool.end());
  }
  std::shuffle(out.train.begin(), out.train.end(), rng);
  std::shuffle(out.validation.begin(), out.validation.end(), rng);
  std::shuffle(out.test.begin(), out.test.end(), rng);
  return out;
}

DataSplit split(const Dataset& data, std::uint64_t seed) {
  DataSplit s;
  s.seed = seed;
  s.indices = split_indices(data.labels, seed);
  s.train = data.select_rows(s.indices.train);
  s.validation = data.select_rows(s.indices.validation);
  s.test = data.select_rows(s.indices.test);
  return s;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> FeaturePipeline::selected_indices() const {
  const auto names = full_feature_names();
  std::vector<std::size_t> idx;
  for (const auto& s : selected) {
    auto it = std::find(names.begin(), names.end(), s);
    if (it == names.end()) {
      throw Error(ErrorKind::InvalidConfig, "selected feature '" + s + "' not produced by encoding");
    }
    idx.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  return idx;
}

void FeaturePipeline::transform(const FlowRecord& record, std::span<double> scratch,
                                std::span<const std::size_t> selected_idx,
                                std::span<double> out) const {
  encoding.encode(record, scratch);
  for (std::size_t k = 0; k < selected_idx.size(); ++k) {
    const std::size_t j = selected_idx[k];
    out[k] = scaler.forward(j, scratch[j]);
  }
}

PreparedData prepare(const std::vector<FlowRecord>& records, std::uint64_t seed,
                     bool already_clean) {
  PreparedData out;
  std::vector<FlowRecord> cleaned;
  if (already_clean) {
    cleaned = records;
    out.clean_report = {records.size(), 0, 0, records.size()};
  } else {
    auto result = clean(records);
    cleaned = std::move(result.records);
    out.clean_report = result.report;
  }
  std::vector<std::uint8_t> labels;
  labels.reserve(cleaned.size());
  for (const auto& r : cleaned) labels.push_back(r.label == Label::Attack ? 1 : 0);
  SplitIndices idx = split_indices(labels, seed);

  // Vocabulary order follows the training rows in input order.
  std::vector<std::size_t> train_sorted = idx.train;
  std::sort(train_sorted.begin(), train_sorted.end());
  std::vector<FlowRecord> train_records;
  train_records.reserve(train_sorted.size());
  for (std::size_t i : train_sorted) train_records.push_back(cleaned[i]);
  out.encoding = fit_encoding(train_records);

  Dataset encoded = apply_encoding(out.encoding, cleaned);
  Dataset train_raw = encoded.select_rows(idx.train);
  out.scaler = fit_scaler(train_raw);
  out.split.seed = seed;
  out.split.train = apply_scaler(out.scaler, train_raw);
  out.split.validation = apply_scaler(out.scaler, encoded.select_rows(idx.validation));
  out.split.test = apply_scaler(out.scaler, encoded.select_rows(idx.test));
  out.split.indices = std::move(idx);
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const EncodingSpec& spec) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : spec.vocabs) {
    arr.push_back({{"feature", v.feature}, {"categories", v.categories}, {"bits", v.bits}});
  }
  return arr;
}

EncodingSpec encoding_from_json(const nlohmann::json& j) {
  EncodingSpec spec;
  for (const auto& e : j) {
    CategoricalVocab v;
    v.feature = e.at("feature").get<std::string>();
    v.categories = e.at("categories").get<std::vector<std::string>>();
    v.bits = e.at("bits").get<int>();
    if (v.bits < bit_width_for(v.categories.size())) {
      throw Error(ErrorKind::InvalidConfig, "bit width too small for vocabulary of " + v.feature);
    }
    spec.vocabs.push_back(std::move(v));
  }
  if (spec.vocabs.size() != 4) {
    throw Error(ErrorKind::InvalidConfig, "encoding must describe 4 categorical features");
  }
  return spec;
}

nlohmann::json to_json(const ScalerParams& params) {
  nlohmann::json j;
  j["feature_names"] = params.feature_names;
  j["mean"] = params.mean;
  j["stddev"] = params.stddev;
  std::vector<int> applies(params.applies.begin(), params.applies.end());
  j["applies"] = applies;
  return j;
}

ScalerParams scaler_from_json(const nlohmann::json& j) {
  ScalerParams p;
  p.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  p.mean = j.at("mean").get<std::vector<double>>();
  p.stddev = j.at("stddev").get<std::vector<double>>();
  for (int a : j.at("applies").get<std::vector<int>>()) p.applies.push_back(a != 0);
  if (p.mean.size() != p.feature_names.size() || p.stddev.size() != p.mean.size() ||
      p.applies.size() != p.mean.size()) {
    throw Error(ErrorKind::InvalidConfig, "scaler arrays differ in length");
  }
  return p;
}

nlohmann::json to_json(const CleanReport& r) {
  return {{"input", r.input},
          {"duplicates_removed", r.duplicates_removed},
          {"inconsistent_dropped", r.inconsistent_dropped},
          {"output", r.output}};
}

nlohmann::json to_json(const Sidecar& s) {
  nlohmann::json j;
  j["feature_names"] = s.feature_names;
  std::vector<std::string> kinds;
  for (auto k : s.feature_kinds) kinds.emplace_back(to_string(k));
  j["feature_kinds"] = kinds;
  j["encoding"] = s.encoding ? to_json(*s.encoding) : nlohmann::json();
  j["scaler"] = s.scaler ? to_json(*s.scaler) : nlohmann::json();
  j["selected_features"] = s.selected;
  j["seed"] = s.seed;
  return j;
}

Sidecar sidecar_from_json(const nlohmann::json& j) {
  Sidecar s;
  s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& k : j.at("feature_kinds")) {
    s.feature_kinds.push_back(feature_kind_from_string(k.get<std::string>()));
  }
  if (j.contains("encoding") && !j["encoding"].is_null()) {
    s.encoding = encoding_from_json(j["encoding"]);
  }
  if (j.contains("scaler") && !j["scaler"].is_null()) s.scaler = scaler_from_json(j["scaler"]);
  if (j.contains("selected_features")) {
    s.selected = j["selected_features"].get<std::vector<std::string>>();
  }
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

void apply_sidecar_kinds(Dataset& data, const Sidecar& sidecar) {
  for (std::size_t j = 0; j < data.cols(); ++j) {
    auto it = std::find(sidecar.feature_names.begin(), sidecar.feature_names.end(),
                        data.feature_names[j]);
    if (it == sidecar.feature_names.end()) {
      throw Error(ErrorKind::InvalidConfig,
                  "column '" + data.feature_names[j] + "' not described by sidecar");
    }
    data.feature_kinds[j] =
        sidecar.feature_kinds[static_cast<std::size_t>(it - sidecar.feature_names.begin())];
  }
}

}  // namespace edgebot
