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

#include "edgebot/flow.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "edgebot/error.hpp"
#include "edgebot/numfmt.hpp"
#include "edgebot/rng.hpp"

namespace edgebot {

std::string_view to_string(Label label) {
  return label == Label::Attack ? "Attack" : "Benign";
}

std::string_view to_string(Proto proto) {
  switch (proto) {
    case Proto::Tcp: return "tcp";
    case Proto::Udp: return "udp";
    case Proto::Icmp: return "icmp";
  }
  return "tcp";
}

bool FlowRecord::same_features_and_label(const FlowRecord& o) const {
  return src_port == o.src_port && dst_port == o.dst_port && proto == o.proto &&
         service == o.service && duration == o.duration &&
         orig_bytes == o.orig_bytes && resp_bytes == o.resp_bytes &&
         conn_state == o.conn_state && history == o.history &&
         orig_pkts == o.orig_pkts && orig_ip_bytes == o.orig_ip_bytes &&
         resp_pkts == o.resp_pkts && resp_ip_bytes == o.resp_ip_bytes &&
         label == o.label;
}

namespace {

enum class Field {
  Ignored, Ts, Uid, OrigH, RespH, SrcPort, DstPort, Proto, Service, Duration,
  OrigBytes, RespBytes, ConnState, History, OrigPkts, OrigIpBytes, RespPkts,
  RespIpBytes, Label, DetailedLabel,
};

Field field_of(std::string_view name) {
  static const std::pair<std::string_view, Field> kNames[] = {
      {"ts", Field::Ts},
      {"uid", Field::Uid},
      {"id.orig_h", Field::OrigH},
      {"id.resp_h", Field::RespH},
      {"id.orig_p", Field::SrcPort},
      {"src_port", Field::SrcPort},
      {"id.resp_p", Field::DstPort},
      {"dst_port", Field::DstPort},
      {"proto", Field::Proto},
      {"service", Field::Service},
      {"duration", Field::Duration},
      {"orig_bytes", Field::OrigBytes},
      {"resp_bytes", Field::RespBytes},
      {"conn_state", Field::ConnState},
      {"history", Field::History},
      {"orig_pkts", Field::OrigPkts},
      {"orig_ip_bytes", Field::OrigIpBytes},
      {"resp_pkts", Field::RespPkts},
      {"resp_ip_bytes", Field::RespIpBytes},
      {"label", Field::Label},
      {"detailed-label", Field::DetailedLabel},
      {"detailed_label", Field::DetailedLabel},
  };
  for (const auto& [n, f] : kNames) {
    if (n == name) return f;
  }
  return Field::Ignored;
}

constexpr Field kRequired[] = {Field::SrcPort, Field::DstPort, Field::Proto,
                               Field::OrigPkts, Field::OrigIpBytes,
                               Field::RespPkts, Field::RespIpBytes};

struct CellContext {
  std::string_view column;
  std::size_t line;
  const std::string& unset;
  const std::string& empty;
};

[[noreturn]] void unparsable(const CellContext& ctx, std::string_view cell,
                             std::string_view why) {
  throw Error(ErrorKind::UnparsableValue,
              "line " + std::to_string(ctx.line) + ", column " +
                  std::string(ctx.column) + ": '" + std::string(cell) + "' " +
                  std::string(why));
}

std::uint64_t parse_count(std::string_view cell, const CellContext& ctx) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty()) {
    unparsable(ctx, cell, "is not a non-negative integer");
  }
  return v;
}

double parse_real(std::string_view cell, const CellContext& ctx) {
  double v = 0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty() ||
      !std::isfinite(v)) {
    unparsable(ctx, cell, "is not a finite number");
  }
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<std::string> parse_category(std::string_view cell, const CellContext& ctx) {
  if (cell == ctx.unset) return std::nullopt;
  if (cell == ctx.empty) return std::string();
  return std::string(cell);
}

// Label cells are resolved after the whole line is read; see finish_label.
struct PendingLabel {
  std::optional<std::string> label;
  std::optional<std::string> detailed;
};

void assign(FlowRecord& r, PendingLabel& pending, Field field, std::string_view cell,
            const CellContext& ctx) {
  const bool unset = cell == ctx.unset;
  switch (field) {
    case Field::Ignored: return;
    case Field::Ts:
      if (!unset) r.ts = parse_real(cell, ctx);
      return;
    case Field::Uid:
      r.uid = unset ? std::string() : std::string(cell);
      return;
    case Field::OrigH:
      r.orig_h = unset ? std::string() : std::string(cell);
      return;
    case Field::RespH:
      r.resp_h = unset ? std::string() : std::string(cell);
      return;
    case Field::SrcPort:
    case Field::DstPort: {
      if (unset) unparsable(ctx, cell, "missing port");
      const std::uint64_t v = parse_count(cell, ctx);
      if (v > 65535) unparsable(ctx, cell, "port out of range [0, 65535]");
      (field == Field::SrcPort ? r.src_port : r.dst_port) = static_cast<std::uint16_t>(v);
      return;
    }
    case Field::Proto: {
      const std::string p = lower(cell);
      if (p == "tcp") r.proto = Proto::Tcp;
      else if (p == "udp") r.proto = Proto::Udp;
      else if (p == "icmp") r.proto = Proto::Icmp;
      else unparsable(ctx, cell, "is not one of tcp, udp, icmp");
      return;
    }
    case Field::Service: r.service = parse_category(cell, ctx); return;
    case Field::ConnState: r.conn_state = parse_category(cell, ctx); return;
    case Field::History: r.history = parse_category(cell, ctx); return;
    case Field::Duration:
      if (unset) {
        r.duration.reset();
      } else {
        const double d = parse_real(cell, ctx);
        if (d < 0) unparsable(ctx, cell, "negative duration");
        r.duration = d;
      }
      return;
    case Field::OrigBytes:
      r.orig_bytes = unset ? std::nullopt : std::optional(parse_count(cell, ctx));
      return;
    case Field::RespBytes:
      r.resp_bytes = unset ? std::nullopt : std::optional(parse_count(cell, ctx));
      return;
    case Field::OrigPkts: r.orig_pkts = parse_count(cell, ctx); return;
    case Field::OrigIpBytes: r.orig_ip_bytes = parse_count(cell, ctx); return;
    case Field::RespPkts: r.resp_pkts = parse_count(cell, ctx); return;
    case Field::RespIpBytes: r.resp_ip_bytes = parse_count(cell, ctx); return;
    case Field::Label:
      if (!unset && !cell.empty()) pending.label = std::string(cell);
      return;
    case Field::DetailedLabel:
      if (!unset && !cell.empty()) pending.detailed = std::string(cell);
      return;
  }
}

// The binary label is authoritative; a detailed label only decides the class
// when the binary label is absent.
void finish_label(FlowRecord& r, const PendingLabel& pending) {
  r.detailed_label = pending.detailed.value_or(std::string());
  if (pending.label) {
    r.label = lower(*pending.label) == "benign" ? Label::Benign : Label::Attack;
  } else if (pending.detailed) {
    r.label = lower(*pending.detailed) == "benign" ? Label::Benign : Label::Attack;
  } else {
    r.label.reset();
  }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string unescape_separator(std::string_view v) {
  if (v.size() == 4 && v[0] == '\\' && v[1] == 'x') {
    int code = 0;
    std::from_chars(v.data() + 2, v.data() + 4, code, 16);
    return std::string(1, static_cast<char>(code));
  }
  return std::string(v);
}

const std::vector<std::string>& default_conn_fields() {
  static const std::vector<std::string> kFields = {
      "ts", "uid", "id.orig_h", "id.orig_p", "id.resp_h", "id.resp_p",
      "proto", "service", "duration", "orig_bytes", "resp_bytes",
      "conn_state", "local_orig", "local_resp", "missed_bytes", "history",
      "orig_pkts", "orig_ip_bytes", "resp_pkts", "resp_ip_bytes",
      "tunnel_parents   label   detailed-label"};
  return kFields;
}

}  // namespace

ConnLogReader ConnLogReader::with_default_layout() {
  ConnLogReader reader;
  reader.set_fields(default_conn_fields());
  return reader;
}

void ConnLogReader::set_fields(std::vector<std::string> names) {
  fields_.clear();
  packed_tail_ = 1;
  if (!names.empty()) {
    auto tail = split_whitespace(names.back());
    if (tail.size() > 1) {
      names.pop_back();
      for (auto t : tail) names.emplace_back(t);
      packed_tail_ = tail.size();
    }
  }
  fields_ = std::move(names);
  for (Field req : kRequired) {
    if (std::none_of(fields_.begin(), fields_.end(),
                     [&](const std::string& n) { return field_of(n) == req; })) {
      throw Error(ErrorKind::MissingHeader,
                  "#fields directive lacks a required column (ports, proto, "
                  "packet and IP byte counts)");
    }
  }
}

std::optional<FlowRecord> ConnLogReader::feed(std::string_view line, std::size_t line_no) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty()) return std::nullopt;
  if (line.front() == '#') {
    // Directive values are separated from the keyword by the current
    // separator, except #separator itself which always uses a space.
    if (line.rfind("#separator", 0) == 0) {
      auto parts = split_whitespace(line.substr(10));
      if (!parts.empty()) {
        const std::string sep = unescape_separator(parts.front());
        if (!sep.empty()) separator_ = sep.front();
      }
      return std::nullopt;
    }
    auto parts = split(line, separator_);
    const std::string_view key = parts.front();
    if (key == "#fields") {
      set_fields(std::vector<std::string>(parts.begin() + 1, parts.end()));
    } else if (key == "#unset_field" && parts.size() > 1) {
      unset_ = std::string(parts[1]);
    } else if (key == "#empty_field" && parts.size() > 1) {
      empty_ = std::string(parts[1]);
    }
    // #types, #path, #open, #close and unknown directives carry no layout.
    return std::nullopt;
  }
  if (fields_.empty()) {
    throw Error(ErrorKind::MissingHeader,
                "line " + std::to_string(line_no) + ": data before any #fields directive");
  }

  auto cells = split(line, separator_);
  const std::size_t packed_cells = fields_.size() - packed_tail_ + 1;
  std::vector<std::string_view> expanded;
  if (packed_tail_ > 1 && cells.size() == packed_cells) {
    auto tail = split_whitespace(cells.back());
    cells.pop_back();
    if (tail.size() > packed_tail_) {
      // Free-text trailing label: fold the excess back into the last cell.
      const char* begin = tail[packed_tail_ - 1].data();
      const char* end = tail.back().data() + tail.back().size();
      tail.resize(packed_tail_ - 1);
      tail.emplace_back(begin, static_cast<std::size_t>(end - begin));
    }
    if (tail.size() == packed_tail_) {
      cells.insert(cells.end(), tail.begin(), tail.end());
    } else if (tail.size() == 1) {
      // Unlabeled stream: only the first packed column is present.
      cells.push_back(tail.front());
      while (cells.size() < fields_.size()) cells.push_back(unset_);
    } else {
      cells.insert(cells.end(), tail.begin(), tail.end());
    }
  }
  if (cells.size() != fields_.size()) {
    throw Error(ErrorKind::FieldCountMismatch,
                "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                    " fields, header declares " + std::to_string(fields_.size()));
  }

  FlowRecord record;
  PendingLabel pending;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CellContext ctx{fields_[i], line_no, unset_, empty_};
    assign(record, pending, field_of(fields_[i]), cells[i], ctx);
  }
  finish_label(record, pending);
  return record;
}

std::vector<FlowRecord> parse_conn_log(std::istream& in) {
  ConnLogReader reader;
  std::vector<FlowRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto rec = reader.feed(line, line_no)) out.push_back(std::move(*rec));
  }
  return out;
}

std::vector<FlowRecord> parse_conn_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_conn_log(in);
}

namespace {

const std::vector<std::string>& writer_fields() {
  static const std::vector<std::string> kFields = {
      "ts", "uid", "id.orig_h", "id.orig_p", "id.resp_h", "id.resp_p", "proto",
      "service", "duration", "orig_bytes", "resp_bytes", "conn_state", "history",
      "orig_pkts", "orig_ip_bytes", "resp_pkts", "resp_ip_bytes", "label",
      "detailed-label"};
  return kFields;
}

std::vector<std::string> record_cells(const FlowRecord& r) {
  auto str = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
  auto cat = [](const std::optional<std::string>& s) {
    if (!s) return std::string("-");
    return s->empty() ? std::string("(empty)") : *s;
  };
  auto count = [](const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : std::string("-");
  };
  return {r.ts ? format_double(*r.ts) : "-",
          str(r.uid),
          str(r.orig_h),
          std::to_string(r.src_port),
          str(r.resp_h),
          std::to_string(r.dst_port),
          std::string(to_string(r.proto)),
          cat(r.service),
          r.duration ? format_double(*r.duration) : "-",
          count(r.orig_bytes),
          count(r.resp_bytes),
          cat(r.conn_state),
          cat(r.history),
          std::to_string(r.orig_pkts),
          std::to_string(r.orig_ip_bytes),
          std::to_string(r.resp_pkts),
          std::to_string(r.resp_ip_bytes),
          r.label ? std::string(*r.label == Label::Attack ? "Malicious" : "Benign") : "-",
          str(r.detailed_label)};
}

}  // namespace

void write_conn_log(std::ostream& out, const std::vector<FlowRecord>& records) {
  out << "#separator \\x09\n#unset_field\t-\n#empty_field\t(empty)\n#path\tconn\n#fields";
  for (const auto& f : writer_fields()) out << '\t' << f;
  out << '\n';
  for (const auto& r : records) {
    const auto cells = record_cells(r);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << '\t';
      out << cells[i];
    }
    out << '\n';
  }
}

void write_flows_csv(std::ostream& out, const std::vector<FlowRecord>& records) {
  write_csv_row(out, writer_fields());
  for (const auto& r : records) write_csv_row(out, record_cells(r));
}

std::vector<FlowRecord> records_from_table(const RawTable& table) {
  std::vector<Field> layout;
  for (const auto& c : table.columns) layout.push_back(field_of(c));
  for (Field req : kRequired) {
    if (std::find(layout.begin(), layout.end(), req) == layout.end()) {
      throw Error(ErrorKind::MissingHeader,
                  table.source + ": flow table lacks a required column");
    }
  }
  static const std::string kUnset = "-";
  static const std::string kEmpty = "(empty)";
  std::vector<FlowRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    FlowRecord record;
    PendingLabel pending;
    const std::size_t line = r < table.line_numbers.size() ? table.line_numbers[r] : r + 1;
    for (std::size_t c = 0; c < layout.size(); ++c) {
      CellContext ctx{table.columns[c], line, kUnset, kEmpty};
      std::string_view cell = table.rows[r][c];
      assign(record, pending, layout[c], cell.empty() ? std::string_view(kUnset) : cell, ctx);
    }
    finish_label(record, pending);
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<FlowRecord> balance_subset(const std::vector<FlowRecord>& records,
                                       std::size_t total, double ratio,
                                       std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::InvalidParams, "ratio must lie in (0, 1)");
  }
  // Rounding favours Attack by at most one row.
  auto want_attack = static_cast<std::size_t>(std::ceil(static_cast<double>(total) * ratio - 1e-9));
  want_attack = std::min(want_attack, total);
  const std::size_t want_benign = total - want_attack;

  std::vector<std::size_t> attack, benign;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].label) continue;
    (*records[i].label == Label::Attack ? attack : benign).push_back(i);
  }
  if (attack.size() < want_attack) {
    throw Error(ErrorKind::InsufficientClassSamples,
                "Attack short by " + std::to_string(want_attack - attack.size()) + " rows");
  }
  if (benign.size() < want_benign) {
    throw Error(ErrorKind::InsufficientClassSamples,
                "Benign short by " + std::to_string(want_benign - benign.size()) + " rows");
  }

  Rng rng(seed);
  // Partial Fisher-Yates: the first k slots become a uniform k-subset.
  auto take = [&rng](std::vector<std::size_t>& pool, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
  };
  take(attack, want_attack);
  take(benign, want_benign);

  std::vector<std::size_t> chosen = attack;
  chosen.insert(chosen.end(), benign.begin(), benign.end());
  std::shuffle(chosen.begin(), chosen.end(), rng);

  std::vector<FlowRecord> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(records[i]);
  return out;
}

}  // namespace edgebot
