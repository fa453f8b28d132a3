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

// Generated data for tests, demos and the acceptance run.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edgebot/dataset.hpp"
#include "edgebot/flow.hpp"

namespace edgebot {

/// Balanced, 15 columns: one decisive column whose class boundary at 0 has
/// positive density on both sides, four weakly informative numerics, five
/// pure-noise numerics and five bit columns. Clean data is separable by a
/// single threshold; small perturbations of the decisive column flip labels.
Dataset separable_dataset(std::size_t rows, std::uint64_t seed);

/// Labeled Zeek-style flows. Attacks are telnet-style scans and short C&C
/// beacons; benign traffic is DNS, HTTP(S) and NTP with realistic sizes.
/// A small share of each class imitates the other.
std::vector<FlowRecord> synthetic_flows(std::size_t count, double attack_ratio,
                                        std::uint64_t seed);

}  // namespace edgebot
