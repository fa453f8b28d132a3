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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgebot/csv.hpp"

namespace edgebot {

enum class Label : std::uint8_t { Benign = 0, Attack = 1 };
enum class Proto : std::uint8_t { Tcp, Udp, Icmp };

std::string_view to_string(Label label);
std::string_view to_string(Proto proto);

/// One Zeek connection. The thirteen model features plus the binary label;
/// ts/uid/addresses are carried for alert keys only and never become features.
struct FlowRecord {
  std::optional<double> ts;
  std::string uid;
  std::string orig_h;
  std::string resp_h;

  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  Proto proto = Proto::Tcp;
  std::optional<std::string> service;
  std::optional<double> duration;
  std::optional<std::uint64_t> orig_bytes;
  std::optional<std::uint64_t> resp_bytes;
  std::optional<std::string> conn_state;
  // "(empty)" is the empty string; "-" is nullopt.
  std::optional<std::string> history;
  std::uint64_t orig_pkts = 0;
  std::uint64_t orig_ip_bytes = 0;
  std::uint64_t resp_pkts = 0;
  std::uint64_t resp_ip_bytes = 0;

  std::optional<Label> label;
  std::string detailed_label;

  bool operator==(const FlowRecord&) const = default;

  /// Equality over the thirteen features and the label only.
  bool same_features_and_label(const FlowRecord& other) const;
};

/// Incremental Zeek TSV reader. Directive lines update the layout; data lines
/// become records. Shared by batch parsing and the streaming classifier.
class ConnLogReader {
 public:
  ConnLogReader() = default;

  /// Preloads the standard conn.log field order so headerless streams parse.
  static ConnLogReader with_default_layout();

  /// Returns a record for data lines and nullopt for directives or blank
  /// lines. Throws Error (MissingHeader, FieldCountMismatch, UnparsableValue).
  std::optional<FlowRecord> feed(std::string_view line, std::size_t line_no);

  bool has_layout() const { return !fields_.empty(); }
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  void set_fields(std::vector<std::string> names);

  char separator_ = '\t';
  std::string unset_ = "-";
  std::string empty_ = "(empty)";
  std::vector<std::string> fields_;
  // Number of names packed into the last tab cell, whitespace separated
  // (labeled captures append "tunnel_parents   label   detailed-label").
  std::size_t packed_tail_ = 1;
};

std::vector<FlowRecord> parse_conn_log(std::istream& in);
std::vector<FlowRecord> parse_conn_log(std::string_view text);

/// Writes a labeled conn.log that parse_conn_log reads back losslessly.
void write_conn_log(std::ostream& out, const std::vector<FlowRecord>& records);

/// Flow CSV with Zeek column names (id.orig_p, proto, ..., label, detailed-label).
void write_flows_csv(std::ostream& out, const std::vector<FlowRecord>& records);
std::vector<FlowRecord> records_from_table(const RawTable& table);

/// Uniform sample without replacement per class, ceil(total * ratio) Attack
/// rows and the rest Benign, returned in shuffled order.
std::vector<FlowRecord> balance_subset(const std::vector<FlowRecord>& records,
                                       std::size_t total, double ratio,
                                       std::uint64_t seed);

}  // namespace edgebot
