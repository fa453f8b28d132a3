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

#include "edgebot/artifact.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "edgebot/checksum.hpp"
#include "edgebot/error.hpp"
#include "edgebot/numfmt.hpp"

namespace edgebot {

namespace {

constexpr char kMagic[4] = {'E', 'B', 'O', 'T'};
constexpr std::uint16_t kLeafFeature = 0xFFFF;
constexpr std::size_t kHeaderSize = 20;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void patch_u64(std::size_t at, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_[at + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  }
  std::size_t size() const { return out_.size(); }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorKind::TruncatedArtifact, "artifact ends mid-record");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_tree(Writer& w, const DecisionTree& t) {
  w.u8(static_cast<std::uint8_t>(t.payload_kind()));
  w.u32(static_cast<std::uint32_t>(t.payload_width()));
  w.u32(static_cast<std::uint32_t>(t.node_count()));
  for (std::size_t i = 0; i < t.node_count(); ++i) {
    const TreeNode& n = t.nodes()[i];
    w.u16(n.is_leaf() ? kLeafFeature : static_cast<std::uint16_t>(n.feature));
    w.f64(n.threshold);
    w.u32(static_cast<std::uint32_t>(n.left));
    w.u32(static_cast<std::uint32_t>(n.right));
    w.f64(n.gain);
    w.f64(n.cover);
    w.f64(n.samples);
    for (double v : t.payload(i)) w.f64(v);
  }
}

DecisionTree read_tree(Reader& r) {
  const auto kind = r.u8();
  if (kind > 1) throw Error(ErrorKind::InvalidConfig, "unknown payload kind in artifact");
  const std::uint32_t width = r.u32();
  const std::uint32_t count = r.u32();
  if (width == 0 || width > 256) throw Error(ErrorKind::InvalidConfig, "bad payload width");
  DecisionTree t(static_cast<PayloadKind>(kind), width);
  std::vector<double> payload(width);
  struct Split {
    std::int32_t id, feature, left, right;
    double threshold, gain;
  };
  std::vector<Split> splits;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t feature = r.u16();
    TreeNode n;
    const double threshold = r.f64();
    const auto left = static_cast<std::int32_t>(r.u32());
    const auto right = static_cast<std::int32_t>(r.u32());
    const double gain = r.f64();
    n.cover = r.f64();
    n.samples = r.f64();
    for (auto& v : payload) v = r.f64();
    n.threshold = threshold;
    n.gain = gain;
    const auto id = t.add_node(n, payload);
    if (feature != kLeafFeature) splits.push_back({id, feature, left, right, threshold, gain});
  }
  for (const auto& s : splits) t.set_split(s.id, s.feature, s.threshold, s.gain, s.left, s.right);
  t.check();
  return t;
}

nlohmann::json meta_json(const Artifact& a) {
  nlohmann::json j;
  j["format"] = "edgebot-model";
  j["model"] = std::string(to_string(a.model.kind));
  j["hyperparameters"] = to_json(a.model.hyper);
  j["feature_names"] = a.model.feature_names();
  j["seed"] = a.meta.seed;
  j["dataset_fingerprint"] = hex64(a.meta.dataset_fingerprint);
  j["train_rows"] = a.meta.train_rows;
  return j;
}

nlohmann::json prep_json(const FeaturePipeline& p) {
  nlohmann::json j;
  j["encoding"] = to_json(p.encoding);
  j["scaler"] = to_json(p.scaler);
  j["selected_features"] = p.selected;
  return j;
}

void section(Writer& w, const char tag[4], const std::vector<std::uint8_t>& payload) {
  w.bytes(tag, 4);
  w.u64(payload.size());
  w.bytes(payload.data(), payload.size());
}

std::vector<std::uint8_t> text_bytes(const nlohmann::json& j) {
  const std::string s = j.dump();
  return {s.begin(), s.end()};
}

}  // namespace

namespace {
Artifact decode_sections(std::span<const std::uint8_t> body, std::uint64_t stored);
}  // namespace

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

std::string Artifact::id() const { return hex64(checksum); }

std::vector<std::uint8_t> serialize(Artifact& a) {
  Writer model;
  model.u8(static_cast<std::uint8_t>(a.model.kind));
  if (const auto* f = std::get_if<ForestModel>(&a.model.impl)) {
    if (!f->trained()) throw Error(ErrorKind::UntrainedModel, "cannot serialize an empty forest");
    model.u32(static_cast<std::uint32_t>(f->classes));
    model.u32(static_cast<std::uint32_t>(f->features_per_split));
    model.u32(static_cast<std::uint32_t>(f->trees.size()));
    for (std::size_t k = 0; k < f->trees.size(); ++k) {
      model.u64(k < f->tree_seeds.size() ? f->tree_seeds[k] : 0);
      write_tree(model, f->trees[k]);
    }
  } else {
    const auto& g = std::get<GbdtModel>(a.model.impl);
    if (!g.trained) throw Error(ErrorKind::UntrainedModel, "cannot serialize an untrained model");
    model.f64(g.base_score);
    model.f64(g.learning_rate);
    model.u32(static_cast<std::uint32_t>(g.trees.size()));
    for (const auto& t : g.trees) write_tree(model, t);
  }

  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kArtifactVersion);
  w.u64(0);  // total length, patched below
  w.u32(a.pipeline ? 3 : 2);
  section(w, "META", text_bytes(meta_json(a)));
  if (a.pipeline) section(w, "PREP", text_bytes(prep_json(*a.pipeline)));
  section(w, "MODL", model.data());
  w.patch_u64(8, w.size() + 8);
  a.checksum = fnv1a64(w.data());
  w.u64(a.checksum);
  return std::move(w.data());
}

Artifact deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::BadMagic, "not an edgebot model artifact");
  }
  if (bytes.size() < kHeaderSize + 8) throw Error(ErrorKind::TruncatedArtifact, "artifact header cut short");
  Reader header(bytes.subspan(4, 12));
  const std::uint32_t version = header.u32();
  if (version == 0 || version > kArtifactVersion) {
    throw Error(ErrorKind::UnsupportedVersion,
                "artifact format version " + std::to_string(version) + " (supported: " +
                    std::to_string(kArtifactVersion) + ")");
  }
  const std::uint64_t total = header.u64();
  if (bytes.size() < total) {
    throw Error(ErrorKind::TruncatedArtifact, "artifact holds " + std::to_string(bytes.size()) +
                                                  " of " + std::to_string(total) + " bytes");
  }
  if (bytes.size() != total) throw Error(ErrorKind::ChecksumMismatch, "trailing bytes after artifact");
  const auto body = bytes.first(bytes.size() - 8);
  Reader tail(bytes.last(8));
  const std::uint64_t stored = tail.u64();
  if (fnv1a64(body) != stored) throw Error(ErrorKind::ChecksumMismatch, "artifact checksum mismatch");

  try {
    return decode_sections(body, stored);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("artifact metadata: ") + e.what());
  }
}

namespace {

Artifact decode_sections(std::span<const std::uint8_t> body, std::uint64_t stored) {
  Reader r(body.subspan(16));
  const std::uint32_t sections = r.u32();
  Artifact a;
  a.checksum = stored;
  std::optional<nlohmann::json> meta, prep;
  std::optional<std::span<const std::uint8_t>> modl;
  for (std::uint32_t s = 0; s < sections; ++s) {
    const auto tag = r.take(4);
    const std::uint64_t len = r.u64();
    const auto payload = r.take(static_cast<std::size_t>(len));
    const std::string name(tag.begin(), tag.end());
    if (name == "META") meta = nlohmann::json::parse(payload.begin(), payload.end());
    else if (name == "PREP") prep = nlohmann::json::parse(payload.begin(), payload.end());
    else if (name == "MODL") modl = payload;
    // Unknown sections from newer writers of the same version are skipped.
  }
  if (!meta || !modl) throw Error(ErrorKind::TruncatedArtifact, "artifact lacks META or MODL");

  a.model.hyper = hyper_params_from_json(meta->at("hyperparameters"));
  a.model.kind = model_kind_from_string(meta->at("model").get<std::string>());
  auto names = meta->at("feature_names").get<std::vector<std::string>>();
  a.meta.seed = meta->at("seed").get<std::uint64_t>();
  a.meta.dataset_fingerprint = std::stoull(meta->at("dataset_fingerprint").get<std::string>(), nullptr, 16);
  a.meta.train_rows = meta->at("train_rows").get<std::size_t>();
  if (prep) {
    FeaturePipeline p;
    p.encoding = encoding_from_json(prep->at("encoding"));
    p.scaler = scaler_from_json(prep->at("scaler"));
    p.selected = prep->at("selected_features").get<std::vector<std::string>>();
    a.pipeline = std::move(p);
  }

  Reader m(*modl);
  const auto kind = static_cast<ModelKind>(m.u8());
  if (kind != a.model.kind) throw Error(ErrorKind::InvalidConfig, "model kind disagrees with metadata");
  if (kind == ModelKind::Rf) {
    ForestModel f;
    f.classes = m.u32();
    f.features_per_split = m.u32();
    const std::uint32_t n = m.u32();
    for (std::uint32_t k = 0; k < n; ++k) {
      f.tree_seeds.push_back(m.u64());
      f.trees.push_back(read_tree(m));
    }
    f.params = forest_params(a.model.hyper, {a.meta.seed, 0, {}, {}, {}});
    f.feature_names = std::move(names);
    a.model.impl = std::move(f);
  } else {
    GbdtModel g;
    g.mode = kind == ModelKind::Xgb ? BoostMode::Xgb : BoostMode::Lgbm;
    g.base_score = m.f64();
    g.learning_rate = m.f64();
    const std::uint32_t n = m.u32();
    for (std::uint32_t k = 0; k < n; ++k) g.trees.push_back(read_tree(m));
    g.params = boost_params(a.model.hyper, {a.meta.seed, 0, {}, {}, {}});
    g.feature_names = std::move(names);
    g.trained = true;
    a.model.impl = std::move(g);
  }
  if (!m.done()) throw Error(ErrorKind::InvalidConfig, "unexpected bytes after model section");
  for (const auto& t : std::visit([](const auto& x) -> const std::vector<DecisionTree>& { return x.trees; },
                                  a.model.impl)) {
    if (t.feature_bound() > a.model.feature_names().size()) {
      throw Error(ErrorKind::FeatureIndexOutOfRange, "tree references a feature beyond the model");
    }
  }
  return a;
}

}  // namespace

void save_artifact(const std::filesystem::path& path, Artifact& artifact) {
  const auto bytes = serialize(artifact);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

Artifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

std::string dump_artifact(const Artifact& a) {
  std::ostringstream out;
  out << "artifact " << a.id() << "\n";
  out << "meta " << meta_json(a).dump() << "\n";
  if (a.pipeline) out << "pipeline " << prep_json(*a.pipeline).dump() << "\n";
  const auto& names = a.model.feature_names();
  auto dump_tree = [&](const DecisionTree& t, std::size_t k) {
    out << "tree " << k << " nodes=" << t.node_count() << " leaves=" << t.leaf_count()
        << " depth=" << t.depth() << "\n";
    for (std::size_t i = 0; i < t.node_count(); ++i) {
      const auto& n = t.nodes()[i];
      out << "  " << i << ": ";
      if (n.is_leaf()) {
        out << "leaf";
        for (double v : t.payload(i)) out << " " << format_double(v);
      } else {
        out << names.at(static_cast<std::size_t>(n.feature)) << " <= " << format_double(n.threshold)
            << " ? " << n.left << " : " << n.right << " gain=" << format_double(n.gain);
      }
      out << " cover=" << format_double(n.cover) << "\n";
    }
  };
  if (const auto* f = std::get_if<ForestModel>(&a.model.impl)) {
    out << "forest trees=" << f->trees.size() << " classes=" << f->classes << "\n";
    for (std::size_t k = 0; k < f->trees.size(); ++k) dump_tree(f->trees[k], k);
  } else {
    const auto& g = std::get<GbdtModel>(a.model.impl);
    out << "gbdt trees=" << g.trees.size() << " base_score=" << format_double(g.base_score)
        << " learning_rate=" << format_double(g.learning_rate) << "\n";
    for (std::size_t k = 0; k < g.trees.size(); ++k) dump_tree(g.trees[k], k);
  }
  return out.str();
}

}  // namespace edgebot
