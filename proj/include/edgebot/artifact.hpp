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

// Model artifact layout (all integers little-endian):
//
//   offset  size  field
//   0       4     magic "EBOT"
//   4       4     u32 format version (currently 1)
//   8       8     u64 total length in bytes, checksum included
//   16      4     u32 section count
//   then per section:
//           4     tag ("META", "PREP", "MODL")
//           8     u64 payload length
//           n     payload
//   end-8   8     u64 FNV-1a 64 over every preceding byte
//
// META and PREP payloads are canonical JSON. MODL is binary:
//   u8 model kind (0 rf, 1 xgb, 2 lgbm)
//   rf:    u32 classes, u32 features_per_split, u32 trees, then per tree u64 seed + tree
//   boost: f64 base_score, f64 learning_rate, u32 trees, then per tree a tree
//   tree:  u8 payload kind, u32 payload width, u32 node count, then per node
//          u16 feature (0xFFFF = leaf), f64 threshold, u32 left, u32 right,
//          f64 gain, f64 cover, f64 samples, width x f64 payload
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgebot/model.hpp"
#include "edgebot/preprocess.hpp"

namespace edgebot {

inline constexpr std::uint32_t kArtifactVersion = 1;

struct ArtifactMeta {
  std::uint64_t seed = 0;
  std::uint64_t dataset_fingerprint = 0;
  std::size_t train_rows = 0;
};

struct Artifact {
  Model model;
  // Absent when the model consumes already-transformed feature vectors.
  std::optional<FeaturePipeline> pipeline;
  ArtifactMeta meta;
  // Filled by serialize/deserialize.
  std::uint64_t checksum = 0;

  /// 16 hex digits of the checksum.
  std::string id() const;
};

std::vector<std::uint8_t> serialize(Artifact& artifact);
/// Validates magic, version, length and checksum before decoding anything.
/// Throws BadMagic, UnsupportedVersion, TruncatedArtifact, ChecksumMismatch.
Artifact deserialize(std::span<const std::uint8_t> bytes);

void save_artifact(const std::filesystem::path& path, Artifact& artifact);
Artifact load_artifact(const std::filesystem::path& path);

/// Human-readable dump of an artifact (metadata, pipeline, every tree).
std::string dump_artifact(const Artifact& artifact);

std::string hex64(std::uint64_t v);

}  // namespace edgebot
