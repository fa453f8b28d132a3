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

#include <sstream>
#include <string>

#include "edgebot/csv.hpp"
#include "edgebot/flow.hpp"
#include "edgebot/synthetic.hpp"
#include "support.hpp"

using namespace edgebot;
using support::thrown;

namespace {

// Header and one row as written by a labeling pass over Zeek output: the
// last tab cell packs three whitespace-separated columns.
const char* kLabeledLog =
    "#separator \\x09\n"
    "#set_separator\t,\n"
    "#empty_field\t(empty)\n"
    "#unset_field\t-\n"
    "#path\tconn\n"
    "#fields\tts\tuid\tid.orig_h\tid.orig_p\tid.resp_h\tid.resp_p\tproto\tservice\tduration\t"
    "orig_bytes\tresp_bytes\tconn_state\tlocal_orig\tlocal_resp\tmissed_bytes\thistory\t"
    "orig_pkts\torig_ip_bytes\tresp_pkts\tresp_ip_bytes\ttunnel_parents   label   detailed-label\n"
    "#types\ttime\tstring\taddr\tport\taddr\tport\tenum\tstring\tinterval\tcount\tcount\tstring\t"
    "bool\tbool\tcount\tstring\tcount\tcount\tcount\tcount\tset[string]   string   string\n"
    "1525879831.015811\tCUmrqr4svHuSXJy5z7\t192.168.100.103\t51524\t65.127.233.163\t23\ttcp\t-\t"
    "2.999051\t0\t0\tS0\t-\t-\t0\tS\t3\t180\t0\t0\t-   Malicious   C&C\n";

}  // namespace

TEST_CASE("labeled conn.log row maps field by field") {
  const auto recs = parse_conn_log(std::string_view(kLabeledLog));
  REQUIRE(recs.size() == 1);
  const FlowRecord& r = recs[0];
  CHECK(r.ts == doctest::Approx(1525879831.015811));
  CHECK(r.uid == "CUmrqr4svHuSXJy5z7");
  CHECK(r.orig_h == "192.168.100.103");
  CHECK(r.src_port == 51524);
  CHECK(r.resp_h == "65.127.233.163");
  CHECK(r.dst_port == 23);
  CHECK(r.proto == Proto::Tcp);
  CHECK_FALSE(r.service.has_value());
  REQUIRE(r.duration.has_value());
  CHECK(*r.duration == doctest::Approx(2.999051));
  CHECK(r.orig_bytes == 0u);
  CHECK(r.resp_bytes == 0u);
  CHECK(r.conn_state == "S0");
  CHECK(r.history == "S");
  CHECK(r.orig_pkts == 3);
  CHECK(r.orig_ip_bytes == 180);
  CHECK(r.resp_pkts == 0);
  CHECK(r.resp_ip_bytes == 0);
  CHECK(r.label == Label::Attack);
  CHECK(r.detailed_label == "C&C");
}

TEST_CASE("unset duration becomes missing") {
  std::string log = kLabeledLog;
  log.replace(log.find("2.999051"), 8, "-");
  const auto recs = parse_conn_log(std::string_view(log));
  REQUIRE(recs.size() == 1);
  CHECK_FALSE(recs[0].duration.has_value());
}

TEST_CASE("directives only yield no records") {
  std::string log = kLabeledLog;
  log.erase(log.find("1525879831"));
  CHECK(parse_conn_log(std::string_view(log)).empty());
  CHECK(parse_conn_log(std::string_view("")).empty());
}

TEST_CASE("conn.log errors") {
  SUBCASE("data before #fields") {
    CHECK(thrown([] { parse_conn_log(std::string_view("1\t2\t3\n")); }) ==
          ErrorKind::MissingHeader);
  }
  SUBCASE("arity") {
    std::string log = kLabeledLog;
    log += "1.0\tCx\n";
    CHECK(thrown([&] { parse_conn_log(std::string_view(log)); }) == ErrorKind::FieldCountMismatch);
  }
  SUBCASE("non-numeric port names column and line") {
    std::string log = kLabeledLog;
    log.replace(log.find("51524"), 5, "5x524");
    try {
      parse_conn_log(std::string_view(log));
      FAIL("no throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnparsableValue);
      const std::string msg = e.what();
      CHECK(msg.find("id.orig_p") != std::string::npos);
      CHECK(msg.find("line 8") != std::string::npos);
    }
  }
}

TEST_CASE("conn.log write/parse round trip") {
  const auto flows = synthetic_flows(500, 0.5, 11);
  std::stringstream ss;
  write_conn_log(ss, flows);
  const auto back = parse_conn_log(ss);
  REQUIRE(back.size() == flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) CHECK(back[i] == flows[i]);
}

TEST_CASE("flow CSV round trip keeps features and label") {
  const auto flows = synthetic_flows(300, 0.3, 12);
  std::stringstream ss;
  write_flows_csv(ss, flows);
  const auto back = records_from_table(parse_csv(ss, true));
  REQUIRE(back.size() == flows.size());
  for (std::size_t i = 0; i < flows.size(); ++i) CHECK(back[i].same_features_and_label(flows[i]));
}

TEST_CASE("headerless stream uses the default layout") {
  auto reader = ConnLogReader::with_default_layout();
  // Unlabeled live output: 21 cells ending with tunnel_parents.
  const std::string unlabeled =
      "1525879831.0\tCa\t10.0.0.1\t40000\t10.0.0.2\t443\ttcp\tssl\t1.5\t100\t2000\tSF\t-\t-\t0\t"
      "ShADadFf\t5\t360\t4\t2208\t-";
  const auto r = reader.feed(unlabeled, 1);
  REQUIRE(r.has_value());
  CHECK(r->dst_port == 443);
  CHECK(r->service == "ssl");
  CHECK_FALSE(r->label.has_value());

  const auto labeled = reader.feed(unlabeled + "   Benign   -", 2);
  REQUIRE(labeled.has_value());
  CHECK(labeled->label == Label::Benign);
}

TEST_CASE("csv basics") {
  const auto t = parse_csv(std::string_view("a,b\n1,2\n"), true);
  CHECK(t.columns == std::vector<std::string>{"a", "b"});
  CHECK(t.rows.size() == 1);

  try {
    parse_csv(std::string_view("a,b\n1\n"), true);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FieldCountMismatch);
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }

  const auto q = parse_csv(std::string_view("a,b\n\"x,y\",2\n"), true);
  CHECK(q.rows[0][0] == "x,y");
  CHECK(thrown([] { parse_csv(std::string_view("a\n\"open\n"), true); }) ==
        ErrorKind::UnbalancedQuote);
}

TEST_CASE("csv quoting round trip") {
  const std::vector<std::string> cells{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
  std::stringstream ss;
  write_csv_row(ss, {"c0", "c1", "c2", "c3", "c4"});
  write_csv_row(ss, cells);
  const auto t = parse_csv(ss, true);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0] == cells);
}

TEST_CASE("balance_subset") {
  std::vector<FlowRecord> recs(20);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    recs[i].src_port = static_cast<std::uint16_t>(i);
    recs[i].label = i < 10 ? Label::Attack : Label::Benign;
  }
  const auto a = balance_subset(recs, 10, 0.5, 3);
  std::size_t attacks = 0;
  for (const auto& r : a) attacks += r.label == Label::Attack;
  CHECK(a.size() == 10);
  CHECK(attacks == 5);
  CHECK(balance_subset(recs, 10, 0.5, 3) == a);

  try {
    balance_subset(recs, 30, 0.5, 3);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientClassSamples);
  }
}
