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

#include "edgebot/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "edgebot/rng.hpp"

namespace edgebot {

Dataset separable_dataset(std::size_t rows, std::uint64_t seed) {
  Dataset d;
  for (int j = 0; j < 10; ++j) {
    d.feature_names.push_back("f" + std::to_string(j));
    d.feature_kinds.push_back(FeatureKind::Numeric);
  }
  for (int j = 0; j < 5; ++j) {
    d.feature_names.push_back("b" + std::to_string(j));
    d.feature_kinds.push_back(FeatureKind::Bit);
  }
  const std::size_t p = d.feature_names.size();
  d.values.assign(rows * p, 0.0);
  d.labels.assign(rows, 0);
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const std::uint8_t y = i % 2 == 0 ? 1 : 0;
    d.labels[i] = y;
    const double s = y ? 1.0 : -1.0;
    double* x = d.values.data() + i * p;
    x[0] = s * std::fabs(z(rng));
    for (int j = 1; j <= 4; ++j) x[j] = 0.5 * s + z(rng);
    for (int j = 5; j <= 9; ++j) x[j] = z(rng);
    for (int j = 10; j < 15; ++j) {
      const double on = j < 12 ? (y ? 0.7 : 0.3) : 0.5;
      x[j] = u(rng) < on ? 1.0 : 0.0;
    }
  }
  // Interleave the classes so no contiguous block is single-class.
  std::vector<std::size_t> order(rows);
  for (std::size_t i = 0; i < rows; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  return d.select_rows(order);
}

namespace {

std::string ipv4(Rng& rng, int a, int b) {
  std::uniform_int_distribution<int> o(1, 254);
  return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(o(rng)) + "." +
         std::to_string(o(rng));
}

std::string uid(Rng& rng) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  std::uniform_int_distribution<int> c(0, 61);
  std::string s = "C";
  for (int k = 0; k < 17; ++k) s.push_back(kAlphabet[c(rng)]);
  return s;
}

std::uint16_t ephemeral(Rng& rng) {
  return static_cast<std::uint16_t>(std::uniform_int_distribution<int>(32768, 60999)(rng));
}

void scan(FlowRecord& r, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  r.proto = Proto::Tcp;
  const double k = u(rng);
  r.dst_port = k < 0.6 ? 23 : k < 0.85 ? 2323 : static_cast<std::uint16_t>(
      std::uniform_int_distribution<int>(1, 65535)(rng));
  r.conn_state = u(rng) < 0.85 ? "S0" : "REJ";
  r.history = *r.conn_state == "S0" ? "S" : "Sr";
  r.duration = std::nullopt;
  r.orig_bytes = std::nullopt;
  r.resp_bytes = std::nullopt;
  r.orig_pkts = 1 + (u(rng) < 0.2 ? 1 : 0);
  r.orig_ip_bytes = 40 * r.orig_pkts;
  r.resp_pkts = *r.conn_state == "REJ" ? 1 : 0;
  r.resp_ip_bytes = 40 * r.resp_pkts;
  r.detailed_label = "PartOfAHorizontalPortScan";
}

void beacon(FlowRecord& r, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  r.proto = Proto::Tcp;
  r.dst_port = u(rng) < 0.5 ? 6667 : 8080;
  r.conn_state = "SF";
  r.history = "ShAdDaFf";
  r.duration = 0.5 + 2.0 * u(rng);
  r.orig_bytes = static_cast<std::uint64_t>(60 + 40 * u(rng));
  r.resp_bytes = static_cast<std::uint64_t>(20 + 30 * u(rng));
  r.orig_pkts = 6;
  r.resp_pkts = 5;
  r.orig_ip_bytes = *r.orig_bytes + 52 * r.orig_pkts;
  r.resp_ip_bytes = *r.resp_bytes + 52 * r.resp_pkts;
  r.detailed_label = "C&C-HeartBeat";
}

void benign(FlowRecord& r, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::lognormal_distribution<double> size(6.0, 1.5);
  const double k = u(rng);
  r.detailed_label.clear();
  if (k < 0.4) {
    r.proto = Proto::Udp;
    r.dst_port = 53;
    r.service = "dns";
    r.conn_state = "SF";
    r.history = "Dd";
    r.duration = 0.001 + 0.05 * u(rng);
    r.orig_bytes = static_cast<std::uint64_t>(30 + 30 * u(rng));
    r.resp_bytes = static_cast<std::uint64_t>(60 + 200 * u(rng));
    r.orig_pkts = 1;
    r.resp_pkts = 1;
    r.orig_ip_bytes = *r.orig_bytes + 28;
    r.resp_ip_bytes = *r.resp_bytes + 28;
  } else if (k < 0.85) {
    r.proto = Proto::Tcp;
    r.dst_port = u(rng) < 0.7 ? 443 : 80;
    r.service = r.dst_port == 443 ? "ssl" : "http";
    r.conn_state = u(rng) < 0.9 ? "SF" : "RSTO";
    r.history = "ShADadFf";
    r.duration = 0.05 + 30.0 * u(rng);
    r.orig_bytes = static_cast<std::uint64_t>(size(rng));
    r.resp_bytes = static_cast<std::uint64_t>(size(rng) * 8.0);
    r.orig_pkts = 4 + *r.orig_bytes / 1000;
    r.resp_pkts = 4 + *r.resp_bytes / 1400;
    r.orig_ip_bytes = *r.orig_bytes + 52 * r.orig_pkts;
    r.resp_ip_bytes = *r.resp_bytes + 52 * r.resp_pkts;
  } else {
    r.proto = Proto::Udp;
    r.dst_port = 123;
    r.conn_state = u(rng) < 0.8 ? "SF" : "S0";
    r.history = *r.conn_state == "SF" ? "Dd" : "D";
    r.duration = 0.01 + 0.1 * u(rng);
    r.orig_bytes = 48;
    r.resp_bytes = *r.conn_state == "SF" ? 48 : 0;
    r.orig_pkts = 1;
    r.resp_pkts = *r.conn_state == "SF" ? 1 : 0;
    r.orig_ip_bytes = 76;
    r.resp_ip_bytes = r.resp_pkts * 76;
  }
}

}  // namespace

std::vector<FlowRecord> synthetic_flows(std::size_t count, double attack_ratio,
                                        std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FlowRecord> out;
  out.reserve(count);
  double ts = 1545403816.0;
  for (std::size_t i = 0; i < count; ++i) {
    FlowRecord r;
    ts += 0.001 + 0.5 * u(rng);
    r.ts = std::round(ts * 1e6) / 1e6;
    r.uid = uid(rng);
    r.orig_h = ipv4(rng, 192, 168);
    r.src_port = ephemeral(rng);
    const bool attack = u(rng) < attack_ratio;
    // Mimics: 3% of each class take the other class's traffic shape.
    const bool mimic = u(rng) < 0.03;
    if (attack != mimic) {
      if (u(rng) < 0.8) scan(r, rng); else beacon(r, rng);
      r.resp_h = ipv4(rng, static_cast<int>(std::uniform_int_distribution<int>(11, 223)(rng)), 77);
    } else {
      benign(r, rng);
      r.resp_h = ipv4(rng, 8, 8);
    }
    r.label = attack ? Label::Attack : Label::Benign;
    if (!attack) r.detailed_label.clear();
    else if (mimic) r.detailed_label = "Attack";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace edgebot
