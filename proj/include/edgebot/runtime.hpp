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

// Streaming classifier. One reader thread parses lines (the conn.log layout
// is stateful), N workers transform and predict, and the calling thread
// writes records in input order. At most queue_capacity lines are in flight;
// the reader blocks beyond that.
//
// Output, one JSON object per line, keys sorted:
//   alert: class, line, model_id, orig_h, orig_p, proto, resp_h, resp_p,
//          score, time, ts, uid
//   error: error, line, message, time
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "edgebot/artifact.hpp"

namespace edgebot {

struct StreamOptions {
  bool alerts_only = false;
  // 0 classifies inline on the calling thread.
  unsigned workers = 1;
  std::size_t queue_capacity = 1024;
  // Replaces the wall-clock timestamp, for reproducible output.
  std::optional<std::string> fixed_time;
};

struct StreamStats {
  std::size_t lines = 0;       // every line read, directives included
  std::size_t classified = 0;  // valid data lines
  std::size_t alerts = 0;      // classified as Attack
  std::size_t errors = 0;      // malformed lines
  std::size_t emitted = 0;     // records written
};

/// Throws InvalidConfig when the artifact carries no pipeline, and Io when
/// the sink fails. Per-line problems become error records.
StreamStats classify_stream(const Artifact& artifact, std::istream& in, std::ostream& out,
                            const StreamOptions& options = {});

/// UTC, millisecond precision, e.g. 2026-01-02T03:04:05.678Z.
std::string iso8601_now();

}  // namespace edgebot
