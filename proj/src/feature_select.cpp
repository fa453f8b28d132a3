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

#include "edgebot/feature_select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "edgebot/boosting.hpp"
#include "edgebot/csv.hpp"
#include "edgebot/error.hpp"
#include "edgebot/forest.hpp"
#include "edgebot/numfmt.hpp"

namespace edgebot {

std::vector<double> rank(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "rank of an empty vector");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> r(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Ranks i+1..j averaged; the sum of two integers halves exactly.
    const double avg = static_cast<double>(i + 1 + j) / 2.0;
    for (std::size_t k = i; k < j; ++k) r[order[k]] = avg;
    i = j;
  }
  return r;
}

double spearman_from_ranks(std::span<const double> rx, std::span<const double> ry) {
  if (rx.size() != ry.size()) throw Error(ErrorKind::LengthMismatch, "vectors differ in length");
  if (rx.size() < 2) throw Error(ErrorKind::EmptyInput, "need at least two observations");
  const double n = static_cast<double>(rx.size());
  // Average ranks always have mean (n + 1) / 2.
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ConstantInput, "constant input has no rank spread");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "vectors differ in length");
  if (x.size() < 2) throw Error(ErrorKind::EmptyInput, "need at least two observations");
  const auto rx = rank(x);
  const auto ry = rank(y);
  return spearman_from_ranks(rx, ry);
}

CorrelationMatrix correlation_matrix(const Dataset& data) {
  if (data.rows() < 2) throw Error(ErrorKind::EmptyInput, "need at least two rows");
  CorrelationMatrix m;
  m.names = data.feature_names;
  m.names.push_back("label");
  const std::size_t k = m.names.size();
  std::vector<std::vector<double>> ranks(k);
  for (std::size_t j = 0; j < data.cols(); ++j) ranks[j] = rank(data.column(j));
  std::vector<double> labels(data.labels.begin(), data.labels.end());
  ranks[k - 1] = rank(labels);
  m.constant.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    m.constant[j] = std::all_of(ranks[j].begin(), ranks[j].end(),
                                [&](double r) { return r == ranks[j][0]; });
  }
  m.values.assign(k * k, std::nullopt);
  for (std::size_t i = 0; i < k; ++i) {
    if (m.constant[i]) continue;
    m.values[i * k + i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (m.constant[j]) continue;
      const double r = spearman_from_ranks(ranks[i], ranks[j]);
      m.values[i * k + j] = r;
      m.values[j * k + i] = r;
    }
  }
  return m;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
  std::vector<std::string> header{"feature"};
  header.insert(header.end(), m.names.begin(), m.names.end());
  write_csv_row(out, header);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row{m.names[i]};
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(cell(m.at(i, j)));
    write_csv_row(out, row);
  }
}

void write_correlation_long(std::ostream& out, const CorrelationMatrix& m) {
  write_csv_row(out, {"feature_a", "feature_b", "r"});
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      write_csv_row(out, {m.names[i], m.names[j], cell(m.at(i, j))});
    }
  }
}

nlohmann::json to_json(const CorrelationMatrix& m) {
  nlohmann::json j;
  j["names"] = m.names;
  std::vector<std::string> constant;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.constant[i]) constant.push_back(m.names[i]);
  }
  j["constant_columns"] = constant;
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto row = nlohmann::json::array();
    for (std::size_t k = 0; k < m.size(); ++k) {
      const auto v = m.at(i, k);
      row.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    }
    rows.push_back(row);
  }
  j["matrix"] = rows;
  return j;
}

std::string_view to_string(ImportanceMode mode) {
  switch (mode) {
    case ImportanceMode::Gain: return "gain";
    case ImportanceMode::Cover: return "cover";
    case ImportanceMode::Weight: return "weight";
  }
  return "weight";
}

ImportanceMode importance_mode_from_string(std::string_view s) {
  if (s == "gain") return ImportanceMode::Gain;
  if (s == "cover") return ImportanceMode::Cover;
  if (s == "weight") return ImportanceMode::Weight;
  throw Error(ErrorKind::InvalidConfig, "unknown importance mode '" + std::string(s) + "'");
}

const std::vector<double>& ImportanceReport::scores(ImportanceMode mode) const {
  switch (mode) {
    case ImportanceMode::Gain: return gain;
    case ImportanceMode::Cover: return cover;
    case ImportanceMode::Weight: return weight;
  }
  return weight;
}

bool ImportanceReport::empty() const {
  return std::all_of(weight.begin(), weight.end(), [](double w) { return w == 0.0; });
}

ImportanceReport tree_importance(std::span<const DecisionTree> trees,
                                 const std::vector<std::string>& feature_names,
                                 std::string model) {
  ImportanceReport r;
  r.model = std::move(model);
  r.feature_names = feature_names;
  const std::size_t p = feature_names.size();
  r.gain.assign(p, 0.0);
  r.cover.assign(p, 0.0);
  r.weight.assign(p, 0.0);
  for (const auto& t : trees) {
    for (const auto& n : t.nodes()) {
      if (n.is_leaf()) continue;
      const auto f = static_cast<std::size_t>(n.feature);
      if (f >= p) throw Error(ErrorKind::FeatureIndexOutOfRange, "split on unknown feature");
      r.weight[f] += 1.0;
      r.gain[f] += std::max(0.0, n.gain);
      r.cover[f] += n.cover;
    }
  }
  return r;
}

ImportanceReport model_importance(const GbdtModel& model, std::string model_id) {
  if (!model.trained) throw Error(ErrorKind::UntrainedModel, "boosted model is not trained");
  return tree_importance(model.trees, model.feature_names, std::move(model_id));
}

ImportanceReport model_importance(const ForestModel& model, std::string model_id) {
  if (!model.trained()) throw Error(ErrorKind::UntrainedModel, "forest has no trees");
  return tree_importance(model.trees, model.feature_names, std::move(model_id));
}

std::vector<std::string> select_nonzero(const ImportanceReport& report, ImportanceMode mode) {
  const auto& s = report.scores(mode);
  std::vector<std::string> out;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (s[j] > 0.0) out.push_back(report.feature_names[j]);
  }
  if (out.empty()) throw Error(ErrorKind::AllZero, "no feature has a positive importance");
  return out;
}

void write_importance_csv(std::ostream& out, const ImportanceReport& report) {
  write_csv_row(out, {"feature", "gain", "cover", "weight"});
  for (std::size_t j = 0; j < report.feature_names.size(); ++j) {
    write_csv_row(out, {report.feature_names[j], format_double(report.gain[j]),
                        format_double(report.cover[j]), format_double(report.weight[j])});
  }
}

nlohmann::json to_json(const ImportanceReport& report) {
  nlohmann::json j;
  j["model"] = report.model;
  for (auto mode : {ImportanceMode::Gain, ImportanceMode::Cover, ImportanceMode::Weight}) {
    nlohmann::json m = nlohmann::json::object();
    const auto& s = report.scores(mode);
    for (std::size_t f = 0; f < s.size(); ++f) m[report.feature_names[f]] = s[f];
    j[std::string(to_string(mode))] = m;
  }
  j["features"] = report.feature_names;
  return j;
}

}  // namespace edgebot
