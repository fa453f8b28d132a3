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
#include <nlohmann/json.hpp>
#include <set>

#include "edgebot/preprocess.hpp"
#include "edgebot/synthetic.hpp"
#include "support.hpp"

using namespace edgebot;

namespace {

FlowRecord flow(Proto proto, std::optional<std::string> service, std::uint16_t dport) {
  FlowRecord r;
  r.proto = proto;
  r.service = std::move(service);
  r.dst_port = dport;
  r.src_port = 40000;
  r.duration = 1.0;
  r.orig_bytes = 10;
  r.resp_bytes = 20;
  r.conn_state = "SF";
  r.history = "ShADadFf";
  r.orig_pkts = 2;
  r.orig_ip_bytes = 120;
  r.resp_pkts = 2;
  r.resp_ip_bytes = 140;
  r.label = Label::Benign;
  return r;
}

double col(const Dataset& d, std::size_t row, const std::string& name) {
  return d.at(row, d.feature_index(name));
}

}  // namespace

TEST_CASE("clean drops duplicates and inconsistent byte counts") {
  std::vector<FlowRecord> recs{flow(Proto::Tcp, "http", 80), flow(Proto::Tcp, "http", 80)};
  recs[1].uid = "different uid, same features";
  auto bad = flow(Proto::Tcp, "http", 81);
  bad.orig_bytes = 100;
  bad.orig_ip_bytes = 40;
  recs.push_back(bad);
  recs.push_back(flow(Proto::Udp, "dns", 53));
  const auto out = clean(recs);
  CHECK(out.records.size() == 2);
  CHECK(out.report.input == 4);
  CHECK(out.report.duplicates_removed == 1);
  CHECK(out.report.inconsistent_dropped == 1);
  CHECK(out.report.output == 2);
  CHECK(out.records[0].uid.empty());
}

TEST_CASE("missing duration imputes zero with an indicator") {
  auto r = flow(Proto::Tcp, "http", 80);
  r.duration.reset();
  const std::vector<FlowRecord> recs{r, flow(Proto::Tcp, "http", 80)};
  const auto spec = fit_encoding(recs);
  const Dataset d = apply_encoding(spec, recs);
  CHECK(col(d, 0, "duration") == 0.0);
  CHECK(col(d, 0, "duration_missing") == 1.0);
  CHECK(col(d, 1, "duration") == 1.0);
  CHECK(col(d, 1, "duration_missing") == 0.0);
}

TEST_CASE("positional binary codes in first-seen order") {
  std::vector<FlowRecord> recs{flow(Proto::Tcp, "http", 80), flow(Proto::Udp, "dns", 53),
                               flow(Proto::Icmp, std::nullopt, 0)};
  const auto spec = fit_encoding(recs);
  const auto& proto = spec.vocab("proto");
  CHECK(proto.categories == std::vector<std::string>{"tcp", "udp", "icmp"});
  CHECK(proto.bits == 2);
  CHECK(proto.code(std::string("tcp")) == 1);
  CHECK(proto.code(std::string("icmp")) == 3);
  const Dataset d = apply_encoding(spec, recs);
  CHECK(col(d, 0, "proto_b1") == 0.0);
  CHECK(col(d, 0, "proto_b0") == 1.0);
  CHECK(col(d, 2, "proto_b1") == 1.0);
  CHECK(col(d, 2, "proto_b0") == 1.0);
  for (const auto& k : spec.feature_kinds()) CHECK((k == FeatureKind::Bit || k == FeatureKind::Numeric));
  CHECK(d.feature_kinds[d.feature_index("proto_b0")] == FeatureKind::Bit);
  CHECK(d.feature_kinds[d.feature_index("duration")] == FeatureKind::Numeric);

  SUBCASE("unseen category is all zeros") {
    const std::vector<FlowRecord> test{flow(Proto::Tcp, "ssh", 22)};
    const Dataset t = apply_encoding(spec, test);
    const int bits = spec.vocab("service").bits;
    for (int b = 0; b < bits; ++b) CHECK(col(t, 0, "service_b" + std::to_string(b)) == 0.0);
  }
  SUBCASE("single category takes one bit") {
    const std::vector<FlowRecord> one{flow(Proto::Tcp, "http", 80)};
    CHECK(fit_encoding(one).vocab("proto").bits == 1);
  }
}

TEST_CASE("bit width leaves room for the reserved code") {
  CHECK(bit_width_for(1) == 1);
  CHECK(bit_width_for(3) == 2);
  CHECK(bit_width_for(4) == 3);
  CHECK(bit_width_for(7) == 3);
  CHECK(bit_width_for(8) == 4);
}

TEST_CASE("standardization") {
  Dataset d;
  d.feature_names = {"x", "c", "b"};
  d.feature_kinds = {FeatureKind::Numeric, FeatureKind::Numeric, FeatureKind::Bit};
  d.values = {0, 3, 1, 10, 3, 0};
  d.labels = {0, 1};
  const auto p = fit_scaler(d);
  const Dataset z = apply_scaler(p, d);
  CHECK(z.at(0, 0) == doctest::Approx(-1.0));
  CHECK(z.at(1, 0) == doctest::Approx(1.0));
  CHECK(z.at(0, 1) == 0.0);
  CHECK(z.at(1, 1) == 0.0);
  CHECK(z.at(0, 2) == 1.0);
  CHECK(z.at(1, 2) == 0.0);
  const Dataset back = invert_scaler(p, z);
  for (std::size_t i = 0; i < d.values.size(); ++i) CHECK(back.values[i] == doctest::Approx(d.values[i]));

  Dataset t = d;
  t.values = {20, 3, 1, 30, 3, 0};
  const Dataset zt = apply_scaler(p, t);
  CHECK(zt.at(0, 0) + zt.at(1, 0) != doctest::Approx(0.0));
}

TEST_CASE("stratified 64/16/20 split") {
  std::vector<std::uint8_t> labels(100);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
  const auto s = split_indices(labels, 9);
  CHECK(s.train.size() == 64);
  CHECK(s.validation.size() == 16);
  CHECK(s.test.size() == 20);
  auto positives = [&](const std::vector<std::size_t>& idx) {
    std::size_t n = 0;
    for (auto i : idx) n += labels[i];
    return static_cast<long>(n);
  };
  CHECK(std::labs(2 * positives(s.train) - 64) <= 2);
  CHECK(std::labs(2 * positives(s.validation) - 16) <= 2);
  CHECK(std::labs(2 * positives(s.test) - 20) <= 2);

  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 100);

  const auto again = split_indices(labels, 9);
  CHECK(again.train == s.train);
  CHECK(again.validation == s.validation);
  CHECK(again.test == s.test);

  std::vector<std::uint8_t> big(400000);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = i % 2;
  const auto b = split_indices(big, 1);
  CHECK(b.train.size() == 256000);
  CHECK(b.validation.size() == 64000);
  CHECK(b.test.size() == 80000);

  CHECK(support::thrown([] { split_indices(std::vector<std::uint8_t>(5, 1), 0); }) ==
        ErrorKind::TooFewRows);
}

TEST_CASE("pipeline transform equals batch encode, scale, project") {
  const auto flows = synthetic_flows(2000, 0.5, 21);
  const PreparedData prep = prepare(flows, 4);
  FeaturePipeline pipe{prep.encoding, prep.scaler, {"dst_port", "history_b0", "orig_ip_bytes", "duration_missing"}};
  const auto idx = pipe.selected_indices();
  const Dataset batch =
      apply_scaler(prep.scaler, apply_encoding(prep.encoding, flows)).select_columns(pipe.selected);
  std::vector<double> scratch(prep.encoding.width()), out(idx.size());
  for (std::size_t i = 0; i < flows.size(); ++i) {
    pipe.transform(flows[i], scratch, idx, out);
    for (std::size_t k = 0; k < idx.size(); ++k) CHECK(out[k] == batch.at(i, k));
  }
}

TEST_CASE("prepare fits on the training split only") {
  const auto flows = synthetic_flows(3000, 0.5, 22);
  const PreparedData prep = prepare(flows, 4);
  const Dataset& tr = prep.split.train;
  const std::size_t j = tr.feature_index("dst_port");
  double mean = 0.0;
  for (std::size_t i = 0; i < tr.rows(); ++i) mean += tr.at(i, j);
  CHECK(mean / tr.rows() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(prep.split.train.rows() + prep.split.validation.rows() + prep.split.test.rows() ==
        prep.clean_report.output);
}

TEST_CASE("sidecar JSON round trip") {
  const auto flows = synthetic_flows(500, 0.5, 23);
  const PreparedData prep = prepare(flows, 4);
  Sidecar s;
  s.feature_names = prep.split.train.feature_names;
  s.feature_kinds = prep.split.train.feature_kinds;
  s.encoding = prep.encoding;
  s.scaler = prep.scaler;
  s.selected = {"src_port", "dst_port"};
  s.seed = 4;
  const auto j = to_json(s);
  const Sidecar back = sidecar_from_json(nlohmann::json::parse(j.dump()));
  CHECK(to_json(back) == j);
  CHECK(back.selected == s.selected);
}
