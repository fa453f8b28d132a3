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

#include <cstring>
#include <filesystem>
#include <random>

#include "edgebot/artifact.hpp"
#include "edgebot/synthetic.hpp"
#include "support.hpp"

using namespace edgebot;
using support::thrown;

namespace {

struct Fixture {
  PreparedData prep;
  std::vector<FlowRecord> flows;

  Fixture() : flows(synthetic_flows(1500, 0.5, 31)) { prep = prepare(flows, 2); }

  Artifact build(ModelKind kind, std::optional<bool> efb = {}) const {
    TrainOptions o;
    o.seed = 4;
    o.use_efb = efb;
    const Model m = train_model(prep.split.train, HyperParams::reference(kind), o);
    FeaturePipeline pipe{prep.encoding, prep.scaler, m.feature_names()};
    return Artifact{m, pipe, {4, fingerprint(prep.split.train), prep.split.train.rows()}, 0};
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<std::vector<double>> random_inputs(std::size_t cols, std::size_t n) {
  Rng rng(99);
  std::normal_distribution<double> z(0.0, 2.0);
  std::vector<std::vector<double>> xs(n, std::vector<double>(cols));
  for (auto& x : xs) {
    for (auto& v : x) v = z(rng);
  }
  return xs;
}

}  // namespace

TEST_CASE("round trip reproduces predictions bit for bit") {
  for (ModelKind kind : {ModelKind::Rf, ModelKind::Xgb, ModelKind::Lgbm}) {
    CAPTURE(to_string(kind));
    Artifact a = fixture().build(kind);
    const auto bytes = serialize(a);
    CHECK(a.checksum != 0);
    const Artifact b = deserialize(bytes);
    CHECK(b.checksum == a.checksum);
    CHECK(b.id() == a.id());
    CHECK(b.model.kind == kind);
    CHECK(b.model.hyper == a.model.hyper);
    CHECK(b.model.feature_names() == a.model.feature_names());
    CHECK(b.meta.seed == 4);
    CHECK(b.meta.dataset_fingerprint == a.meta.dataset_fingerprint);
    for (const auto& x : random_inputs(a.model.feature_names().size(), 1000)) {
      const double sa = a.model.score(x), sb = b.model.score(x);
      CHECK(std::memcmp(&sa, &sb, sizeof sa) == 0);
      CHECK(a.model.predict(x) == b.model.predict(x));
    }
    Artifact c = b;
    CHECK(serialize(c) == bytes);
  }
}

TEST_CASE("pipeline survives the round trip") {
  Artifact a = fixture().build(ModelKind::Lgbm);
  const Artifact b = deserialize(serialize(a));
  REQUIRE(b.pipeline.has_value());
  const auto& f = fixture();
  const auto ia = a.pipeline->selected_indices();
  const auto ib = b.pipeline->selected_indices();
  CHECK(ia == ib);
  std::vector<double> sa(a.pipeline->encoding.width()), sb(sa.size()), xa(ia.size()), xb(ib.size());
  for (const auto& r : f.flows) {
    a.pipeline->transform(r, sa, ia, xa);
    b.pipeline->transform(r, sb, ib, xb);
    CHECK(xa == xb);
    CHECK(a.model.predict(xa) == b.model.predict(xb));
  }
}

TEST_CASE("integrity checks") {
  Artifact a = fixture().build(ModelKind::Xgb);
  const auto bytes = serialize(a);
  REQUIRE(bytes.size() > 64);

  SUBCASE("any flipped payload byte fails the checksum") {
    Rng rng(5);
    std::uniform_int_distribution<std::size_t> pos(20, bytes.size() - 1);
    for (int t = 0; t < 300; ++t) {
      auto bad = bytes;
      bad[pos(rng)] ^= 0x20;
      CHECK(thrown([&] { deserialize(bad); }) == ErrorKind::ChecksumMismatch);
    }
  }
  SUBCASE("truncation") {
    for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2,
                             bytes.size() - 1}) {
      std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<long>(keep));
      const auto k = thrown([&] { deserialize(cut); });
      CHECK((k == ErrorKind::TruncatedArtifact || k == ErrorKind::BadMagic));
    }
    std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 1);
    CHECK(thrown([&] { deserialize(cut); }) == ErrorKind::TruncatedArtifact);
  }
  SUBCASE("future version") {
    auto v2 = bytes;
    v2[4] = 2;
    CHECK(thrown([&] { deserialize(v2); }) == ErrorKind::UnsupportedVersion);
  }
  SUBCASE("magic") {
    auto bad = bytes;
    bad[0] = 'X';
    CHECK(thrown([&] { deserialize(bad); }) == ErrorKind::BadMagic);
  }
}

TEST_CASE("file round trip without training data") {
  Artifact a = fixture().build(ModelKind::Rf);
  const auto path = std::filesystem::temp_directory_path() / "edgebot_artifact_test.bin";
  save_artifact(path, a);
  CHECK(std::filesystem::file_size(path) == serialize(a).size());
  const Artifact b = load_artifact(path);
  CHECK(b.id() == a.id());
  std::filesystem::remove(path);
  CHECK(thrown([&] { load_artifact(path); }) == ErrorKind::Io);
  const std::string dump = dump_artifact(b);
  CHECK(dump.find(b.id()) != std::string::npos);
  CHECK(dump.find("tree 99") != std::string::npos);
}

TEST_CASE("efb bundles persist with the model") {
  Artifact a = fixture().build(ModelKind::Lgbm, true);
  const auto& g = std::get<GbdtModel>(a.model.impl);
  const Artifact b = deserialize(serialize(a));
  const auto& h = std::get<GbdtModel>(b.model.impl);
  CHECK(g.trees == h.trees);
  CHECK(g.base_score == h.base_score);
}
