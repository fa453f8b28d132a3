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

// edgebot command-line front end. See README.md for the file formats.
//
// Option precedence: command line, then --config files (later files win),
// then EDGEBOT_<NAME> environment variables.

#include <csignal>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <streambuf>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "edgebot/artifact.hpp"
#include "edgebot/csv.hpp"
#include "edgebot/error.hpp"
#include "edgebot/feature_select.hpp"
#include "edgebot/flow.hpp"
#include "edgebot/model.hpp"
#include "edgebot/preprocess.hpp"
#include "edgebot/runtime.hpp"
#include "edgebot/synthetic.hpp"
#include "edgebot/tuning_eval.hpp"

namespace fs = std::filesystem;
using namespace edgebot;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitData = 4;
constexpr int kExitModel = 5;
constexpr int kExitIo = 6;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage:
      return kExitUsage;
    case ErrorKind::MissingHeader:
    case ErrorKind::FieldCountMismatch:
    case ErrorKind::UnparsableValue:
    case ErrorKind::UnbalancedQuote:
      return kExitInput;
    case ErrorKind::UntrainedModel:
    case ErrorKind::PayloadKindMismatch:
    case ErrorKind::ChecksumMismatch:
    case ErrorKind::UnsupportedVersion:
    case ErrorKind::TruncatedArtifact:
    case ErrorKind::BadMagic:
      return kExitModel;
    case ErrorKind::Io:
      return kExitIo;
    default:
      return kExitData;
  }
}

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct Global {
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  unsigned threads = 0;
};

fs::path out_path(const Global& g, const std::string& name) {
  fs::create_directories(g.output_dir);
  return fs::path(g.output_dir) / name;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + p.string());
  return in;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
}

template <class Fn>
void write_with(const fs::path& p, Fn&& fn) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  fn(out);
  out.close();
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
}

json read_json(const fs::path& p) {
  auto in = open_in(p);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::UnparsableValue, p.string() + ": " + e.what());
  }
}

std::string canonical(const json& j) { return j.dump(2) + "\n"; }

/// Zeek logs by content (a leading '#' directive or a tab), flow CSV otherwise.
std::vector<FlowRecord> read_flows(const fs::path& p) {
  auto in = open_in(p);
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);
  if (!first.empty() && (first[0] == '#' || first.find('\t') != std::string::npos)) {
    return parse_conn_log(in);
  }
  return records_from_table(parse_csv(in, true, p.string()));
}

Sidecar load_sidecar(const fs::path& p) {
  try {
    return sidecar_from_json(read_json(p));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, p.string() + ": " + e.what());
  }
}

/// Dataset CSV plus sidecar kinds; projected onto the sidecar selection.
Dataset load_dataset(const fs::path& p, const std::optional<Sidecar>& sidecar) {
  auto in = open_in(p);
  Dataset d = read_dataset_csv(in, p.string());
  if (sidecar) {
    apply_sidecar_kinds(d, *sidecar);
    if (!sidecar->selected.empty()) d = d.select_columns(sidecar->selected);
  }
  return d;
}

std::optional<Sidecar> sidecar_near(const std::string& explicit_path, const fs::path& data) {
  if (!explicit_path.empty()) return load_sidecar(explicit_path);
  const fs::path guess = data.parent_path() / "pipeline.json";
  if (fs::exists(guess)) return load_sidecar(guess);
  return std::nullopt;
}

HyperParams resolve_params(const std::string& model, const std::string& params,
                           const std::vector<std::string>& overrides) {
  const ModelKind kind = model_kind_from_string(model);
  HyperParams hp;
  hp.kind = kind;
  if (params == "reference") {
    hp = HyperParams::reference(kind);
  } else if (params != "defaults") {
    try {
      hp = hyper_params_from_json(read_json(params));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, params + ": " + e.what());
    }
    if (hp.kind != kind) throw Error(ErrorKind::InvalidConfig, params + " is for another model kind");
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Usage, "--set expects field=value, got " + kv);
    set_field(hp, kv.substr(0, eq), kv.substr(eq + 1));
  }
  hp.validate();
  return hp;
}

TrainOptions train_options(const Global& g) {
  TrainOptions o;
  o.seed = g.seed;
  o.threads = g.threads;
  return o;
}

Dataset project(const Dataset& d, const Model& m) { return d.select_columns(m.feature_names()); }

// Blocks at end of file and retries until a signal arrives.
class FollowBuf : public std::streambuf {
 public:
  explicit FollowBuf(std::istream& src) : src_(src) {}

 protected:
  int_type underflow() override {
    for (;;) {
      src_.read(buf_, sizeof buf_);
      const auto n = src_.gcount();
      if (n > 0) {
        setg(buf_, buf_, buf_ + n);
        return traits_type::to_int_type(buf_[0]);
      }
      if (g_stop) return traits_type::eof();
      src_.clear();
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
    }
  }

 private:
  std::istream& src_;
  char buf_[4096];
};

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t rows = 10000;
  double attack_ratio = 0.5;
  std::string out = "flows.log";
};

int cmd_synth(const Global& g, const SynthArgs& a) {
  const auto flows = synthetic_flows(a.rows, a.attack_ratio, g.seed);
  write_with(out_path(g, a.out), [&](std::ostream& o) { write_conn_log(o, flows); });
  std::cout << "wrote " << flows.size() << " flows to " << out_path(g, a.out).string() << "\n";
  return kExitOk;
}

struct IngestArgs {
  std::vector<std::string> inputs;
  std::size_t balance = 0;
  double ratio = 0.5;
  std::string out = "flows.csv";
};

int cmd_ingest(const Global& g, const IngestArgs& a) {
  std::vector<FlowRecord> all;
  for (const auto& p : a.inputs) {
    auto part = read_flows(p);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (a.balance > 0) all = balance_subset(all, a.balance, a.ratio, g.seed);
  write_with(out_path(g, a.out), [&](std::ostream& o) { write_flows_csv(o, all); });
  std::size_t attacks = 0;
  for (const auto& r : all) attacks += r.label == Label::Attack;
  std::cout << "ingested " << all.size() << " flows (" << attacks << " Attack) into "
            << out_path(g, a.out).string() << "\n";
  return kExitOk;
}

struct PreprocessArgs {
  std::string input;
  bool already_clean = false;
};

int cmd_preprocess(const Global& g, const PreprocessArgs& a) {
  const auto flows = read_flows(a.input);
  PreparedData prep = prepare(flows, g.seed, a.already_clean);
  auto emit = [&](const Dataset& d, const char* name) {
    write_with(out_path(g, name), [&](std::ostream& o) { write_dataset_csv(o, d); });
  };
  emit(prep.split.train, "train.csv");
  emit(prep.split.validation, "validation.csv");
  emit(prep.split.test, "test.csv");
  Sidecar s;
  s.feature_names = prep.split.train.feature_names;
  s.feature_kinds = prep.split.train.feature_kinds;
  s.encoding = prep.encoding;
  s.scaler = prep.scaler;
  s.seed = g.seed;
  write_text(out_path(g, "pipeline.json"), canonical(to_json(s)));
  write_text(out_path(g, "clean_report.json"), canonical(to_json(prep.clean_report)));
  std::cout << "rows in " << prep.clean_report.input << ", kept " << prep.clean_report.output
            << " (train " << prep.split.train.rows() << ", validation "
            << prep.split.validation.rows() << ", test " << prep.split.test.rows() << ")\n";
  return kExitOk;
}

struct SelectArgs {
  std::string data;
  std::string sidecar;
  std::string model = "xgb";
  std::string params = "reference";
  std::string mode = "weight";
};

int cmd_select(const Global& g, const SelectArgs& a) {
  auto side = sidecar_near(a.sidecar, a.data);
  if (!side) throw Error(ErrorKind::Usage, "select-features needs --sidecar pipeline.json");
  Sidecar all = *side;
  all.selected.clear();
  const Dataset train = load_dataset(a.data, all);
  const auto corr = correlation_matrix(train);
  write_with(out_path(g, "correlation.csv"), [&](std::ostream& o) { write_correlation_csv(o, corr); });
  write_with(out_path(g, "correlation_long.csv"),
             [&](std::ostream& o) { write_correlation_long(o, corr); });

  const HyperParams hp = resolve_params(a.model, a.params, {});
  const Model m = train_model(train, hp, train_options(g));
  const ImportanceReport report =
      std::visit([&](const auto& impl) { return model_importance(impl, a.model); }, m.impl);
  write_with(out_path(g, "importance.csv"), [&](std::ostream& o) { write_importance_csv(o, report); });
  const auto keep = select_nonzero(report, importance_mode_from_string(a.mode));
  side->selected = keep;
  write_text(out_path(g, "pipeline.json"), canonical(to_json(*side)));
  std::cout << "selected " << keep.size() << " of " << train.cols() << " features:";
  for (const auto& f : keep) std::cout << " " << f;
  std::cout << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string model;
  std::string params = "reference";
  std::vector<std::string> overrides;
  std::string data;
  std::string validation;
  std::string sidecar;
  std::string out = "model.bin";
};

std::string guess_sibling(const std::string& given, const std::string& data, const char* name) {
  if (!given.empty()) return given;
  const fs::path p = fs::path(data).parent_path() / name;
  return fs::exists(p) ? p.string() : std::string();
}

Artifact make_artifact(const Model& m, const std::optional<Sidecar>& side, const Dataset& train,
                       std::uint64_t seed) {
  std::optional<FeaturePipeline> pipe;
  if (side && side->encoding && side->scaler) {
    pipe = FeaturePipeline{*side->encoding, *side->scaler, m.feature_names()};
  }
  return Artifact{m, pipe, {seed, fingerprint(train), train.rows()}, 0};
}

int cmd_train(const Global& g, const TrainArgs& a) {
  const auto side = sidecar_near(a.sidecar, a.data);
  const HyperParams hp = resolve_params(a.model, a.params, a.overrides);
  const Dataset train = load_dataset(a.data, side);
  const Model m = train_model(train, hp, train_options(g));
  Artifact art = make_artifact(m, side, train, g.seed);
  save_artifact(out_path(g, a.out), art);
  std::cout << "artifact " << out_path(g, a.out).string() << " id " << art.id() << "\n";
  const std::string vpath = guess_sibling(a.validation, a.data, "validation.csv");
  if (!vpath.empty()) {
    EvalReport r = evaluate(m, project(load_dataset(vpath, side), m), "validation");
    r.model_id = art.id();
    write_text(out_path(g, "report_validation.json"), report_json(r));
    std::cout << format_table({r});
  }
  return kExitOk;
}

struct TuneArgs {
  std::string model;
  std::string space;
  int n_iter = 20;
  std::string data;
  std::string validation;
  std::string sidecar;
  std::string metric = "accuracy";
};

int cmd_tune(const Global& g, const TuneArgs& a) {
  const auto side = sidecar_near(a.sidecar, a.data);
  ParamSpace space;
  if (a.space.empty()) {
    space = ParamSpace::around_reference(model_kind_from_string(a.model), a.n_iter, g.seed);
  } else {
    try {
      space = param_space_from_json(read_json(a.space));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidConfig, a.space + ": " + e.what());
    }
  }
  const std::string vpath = guess_sibling(a.validation, a.data, "validation.csv");
  if (vpath.empty()) throw Error(ErrorKind::Usage, "tune needs --validation");
  const Dataset train = load_dataset(a.data, side);
  const Dataset val = load_dataset(vpath, side);
  SearchMetric metric;
  if (a.metric == "accuracy") metric = SearchMetric::Accuracy;
  else if (a.metric == "f1") metric = SearchMetric::F1;
  else throw Error(ErrorKind::Usage, "--metric must be accuracy or f1");
  const auto result = random_search(space, train, val, train_options(g), metric);
  write_with(out_path(g, "trials.jsonl"), [&](std::ostream& o) { write_trial_log(o, result.trials); });
  write_text(out_path(g, "best_params.json"), canonical(to_json(result.best)));
  std::cout << "best trial " << result.best_index << " score " << result.best_score << " of "
            << result.trials.size() << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string sidecar;
  std::string split = "test";
};

int cmd_evaluate(const Global& g, const EvaluateArgs& a) {
  const Artifact art = load_artifact(a.model);
  const auto side = sidecar_near(a.sidecar, a.data);
  EvalReport r = evaluate(art.model, project(load_dataset(a.data, side), art.model), a.split);
  r.model_id = art.id();
  write_text(out_path(g, "report_" + a.split + ".json"), report_json(r));
  std::cout << format_table({r});
  return kExitOk;
}

struct NoiseArgs {
  std::string model;
  std::string data;
  std::string train;
  std::string sidecar;
  double sigma = 0.1;
  int repeats = 10;
};

int cmd_noise(const Global& g, const NoiseArgs& a) {
  const Artifact art = load_artifact(a.model);
  const auto side = sidecar_near(a.sidecar, a.data);
  const Dataset test = project(load_dataset(a.data, side), art.model);
  const std::string tpath = guess_sibling(a.train, a.data, "train.csv");
  if (tpath.empty()) throw Error(ErrorKind::Usage, "noise-test needs --train for feature spreads");
  const Dataset train = project(load_dataset(tpath, side), art.model);
  if (a.repeats < 1) throw Error(ErrorKind::Usage, "--repeats must be >= 1");

  EvalReport clean = evaluate(art.model, test, "test");
  clean.model_id = art.id();
  json noisy = json::array();
  double sum = 0.0;
  for (int k = 0; k < a.repeats; ++k) {
    NoiseSpec spec = noise_spec(train, a.sigma, derive_seed(g.seed, static_cast<std::uint64_t>(k)));
    EvalReport r = evaluate(art.model, inject_noise(test, spec), "test+noise");
    r.noise = spec;
    r.model_id = art.id();
    sum += r.metrics.accuracy.value_or(0.0);
    noisy.push_back(to_json(r));
  }
  const double mean = sum / a.repeats;
  json j;
  j["clean"] = to_json(clean);
  j["noisy"] = noisy;
  j["sigma"] = a.sigma;
  j["mean_noisy_accuracy"] = mean;
  j["accuracy_drop"] = clean.metrics.accuracy.value_or(0.0) - mean;
  write_text(out_path(g, "noise_report.json"), canonical(j));
  std::cout << "clean accuracy " << clean.metrics.accuracy.value_or(0.0) << ", noisy mean " << mean
            << " over " << a.repeats << " seeds (sigma " << a.sigma << ")\n";
  return kExitOk;
}

struct BenchArgs {
  std::vector<std::string> models{"rf", "xgb", "lgbm"};
  std::string params = "reference";
  std::string data;
  std::string test;
  std::string sidecar;
  int repeats = 3;
};

int cmd_benchmark(const Global& g, const BenchArgs& a) {
  const auto side = sidecar_near(a.sidecar, a.data);
  const std::string tpath = guess_sibling(a.test, a.data, "test.csv");
  if (tpath.empty()) throw Error(ErrorKind::Usage, "benchmark needs --test");
  const Dataset train = load_dataset(a.data, side);
  const Dataset test = load_dataset(tpath, side);
  std::vector<EvalReport> reports;
  json all = json::array();
  for (const auto& name : a.models) {
    const HyperParams hp = resolve_params(name, a.params, {});
    reports.push_back(benchmark(hp, train, test, train_options(g), a.repeats));
    all.push_back(to_json(reports.back()));
  }
  write_text(out_path(g, "benchmark.json"), canonical(all));
  std::cout << format_table(reports);
  return kExitOk;
}

struct StreamArgs {
  std::string model;
  std::string input = "-";
  std::string output;
  bool alerts_only = false;
  bool follow = false;
  unsigned workers = 1;
  std::size_t queue = 1024;
};

int run_stream(const Global&, const StreamArgs& a, bool follow) {
  const Artifact art = load_artifact(a.model);
  StreamOptions opt;
  opt.alerts_only = a.alerts_only;
  opt.workers = a.workers;
  opt.queue_capacity = a.queue;

  std::ifstream file;
  std::istream* in = &std::cin;
  if (a.input != "-") {
    file = open_in(a.input);
    in = &file;
  }
  std::unique_ptr<FollowBuf> fbuf;
  std::unique_ptr<std::istream> fin;
  if (follow) {
    fbuf = std::make_unique<FollowBuf>(*in);
    fin = std::make_unique<std::istream>(fbuf.get());
    in = fin.get();
  }
  std::ofstream ofile;
  std::ostream* out = &std::cout;
  if (!a.output.empty()) {
    ofile.open(a.output, std::ios::binary | std::ios::trunc);
    if (!ofile) throw Error(ErrorKind::Io, "cannot write " + a.output);
    out = &ofile;
  }
  const StreamStats s = classify_stream(art, *in, *out, opt);
  std::cerr << "lines " << s.lines << ", classified " << s.classified << ", alerts " << s.alerts
            << ", errors " << s.errors << "\n";
  return kExitOk;
}

int cmd_dump(const std::string& model) {
  std::cout << dump_artifact(load_artifact(model));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgebot: flow-based botnet detection with tree ensembles", "edgebot"};
  app.option_defaults()->always_capture_default();
  Global g;
  app.set_config("--config", "", "key=value config file(s); later files win")->expected(0, 16);
  app.add_option("--seed", g.seed, "master random seed")->envname("EDGEBOT_SEED");
  app.add_option("--output-dir", g.output_dir, "directory for written files")
      ->envname("EDGEBOT_OUTPUT_DIR");
  app.add_option("--threads", g.threads, "worker threads for training (0 = all cores)")
      ->envname("EDGEBOT_THREADS");
  app.require_subcommand(1);
  app.fallthrough();

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "write a labeled synthetic conn.log");
  s_synth->add_option("--rows", synth.rows);
  s_synth->add_option("--attack-ratio", synth.attack_ratio);
  s_synth->add_option("--out", synth.out, "file name under --output-dir");

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "parse labeled conn.log files into a flow CSV");
  s_ingest->add_option("--input", ingest.inputs, "conn.log or flow CSV (repeatable)")->required();
  s_ingest->add_option("--balance", ingest.balance, "draw a class-balanced subset of this size");
  s_ingest->add_option("--ratio", ingest.ratio, "Attack share of the balanced subset");
  s_ingest->add_option("--out", ingest.out);

  PreprocessArgs pre;
  auto* s_pre = app.add_subcommand("preprocess", "clean, split, encode and scale flows");
  s_pre->add_option("--input", pre.input, "flow CSV or conn.log")->required();
  s_pre->add_flag("--already-clean", pre.already_clean, "skip duplicate and consistency filtering");

  SelectArgs sel;
  auto* s_sel = app.add_subcommand("select-features", "correlations, importances, selection");
  s_sel->add_option("--data", sel.data, "encoded training CSV")->required();
  s_sel->add_option("--sidecar", sel.sidecar, "pipeline.json (default: next to --data)");
  s_sel->add_option("--model", sel.model, "model used for importances")
      ->check(CLI::IsMember({"rf", "xgb", "lgbm"}));
  s_sel->add_option("--params", sel.params, "reference, defaults or a params JSON file");
  s_sel->add_option("--mode", sel.mode)->check(CLI::IsMember({"gain", "cover", "weight"}));

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "train a model and write its artifact");
  s_train->add_option("--model", tr.model)->required()->check(CLI::IsMember({"rf", "xgb", "lgbm"}));
  s_train->add_option("--params", tr.params, "reference, defaults or a params JSON file");
  s_train->add_option("--set", tr.overrides, "field=value hyperparameter override (repeatable)");
  s_train->add_option("--data", tr.data, "encoded training CSV")->required();
  s_train->add_option("--validation", tr.validation, "default: validation.csv next to --data");
  s_train->add_option("--sidecar", tr.sidecar, "default: pipeline.json next to --data");
  s_train->add_option("--out", tr.out);

  TuneArgs tu;
  auto* s_tune = app.add_subcommand("tune", "random hyperparameter search on the validation split");
  s_tune->add_option("--model", tu.model)->check(CLI::IsMember({"rf", "xgb", "lgbm"}));
  s_tune->add_option("--space", tu.space, "search space JSON (default: pool around the reference preset)");
  s_tune->add_option("--n-iter", tu.n_iter);
  s_tune->add_option("--data", tu.data)->required();
  s_tune->add_option("--validation", tu.validation);
  s_tune->add_option("--sidecar", tu.sidecar);
  s_tune->add_option("--metric", tu.metric)->check(CLI::IsMember({"accuracy", "f1"}));

  EvaluateArgs ev;
  auto* s_eval = app.add_subcommand("evaluate", "metrics of an artifact on an encoded split");
  s_eval->add_option("--model", ev.model, "artifact file")->required();
  s_eval->add_option("--data", ev.data)->required();
  s_eval->add_option("--sidecar", ev.sidecar);
  s_eval->add_option("--split", ev.split, "name used in the report");

  NoiseArgs no;
  auto* s_noise = app.add_subcommand("noise-test", "accuracy under Gaussian feature noise");
  s_noise->add_option("--model", no.model)->required();
  s_noise->add_option("--data", no.data, "encoded test CSV")->required();
  s_noise->add_option("--train", no.train, "encoded training CSV (default: next to --data)");
  s_noise->add_option("--sidecar", no.sidecar);
  s_noise->add_option("--sigma", no.sigma, "noise std as a fraction of each training std")
      ->envname("EDGEBOT_SIGMA");
  s_noise->add_option("--repeats", no.repeats, "number of noise seeds");

  BenchArgs be;
  auto* s_bench = app.add_subcommand("benchmark", "training time, inference time, artifact size");
  s_bench->add_option("--models", be.models)->check(CLI::IsMember({"rf", "xgb", "lgbm"}));
  s_bench->add_option("--params", be.params);
  s_bench->add_option("--data", be.data)->required();
  s_bench->add_option("--test", be.test);
  s_bench->add_option("--sidecar", be.sidecar);
  s_bench->add_option("--repeats", be.repeats);

  auto add_stream = [](CLI::App* sub, StreamArgs& st) {
    sub->add_option("--model", st.model, "artifact file")->required();
    sub->add_option("--input", st.input, "conn.log lines, - for stdin");
    sub->add_option("--output", st.output, "JSON-lines sink (default stdout)");
    sub->add_flag("--alerts-only", st.alerts_only, "emit Attack predictions only");
    sub->add_option("--workers", st.workers, "classifier threads (0 = inline)");
    sub->add_option("--queue", st.queue, "maximum lines in flight");
  };
  StreamArgs serve;
  auto* s_serve = app.add_subcommand("serve", "classify a live conn.log stream");
  add_stream(s_serve, serve);
  s_serve->add_flag("--follow", serve.follow, "keep reading at end of file until interrupted");
  StreamArgs predict;
  auto* s_predict = app.add_subcommand("predict", "classify a finite conn.log");
  add_stream(s_predict, predict);

  std::string dump_model;
  auto* s_dump = app.add_subcommand("dump", "print an artifact in readable form");
  s_dump->add_option("--model", dump_model)->required();

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "edgebot: " << e.what() << "\n";
    const auto extra = app.remaining();
    if (!extra.empty()) std::cerr << "edgebot: unrecognized argument '" << extra.front() << "'\n";
    std::cerr << "run 'edgebot --help' for usage\n";
    return kExitUsage;
  }

  std::signal(SIGPIPE, SIG_IGN);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    if (*s_synth) return cmd_synth(g, synth);
    if (*s_ingest) return cmd_ingest(g, ingest);
    if (*s_pre) return cmd_preprocess(g, pre);
    if (*s_sel) return cmd_select(g, sel);
    if (*s_train) return cmd_train(g, tr);
    if (*s_tune) {
      if (tu.model.empty() && tu.space.empty()) throw Error(ErrorKind::Usage, "tune needs --model or --space");
      return cmd_tune(g, tu);
    }
    if (*s_eval) return cmd_evaluate(g, ev);
    if (*s_noise) return cmd_noise(g, no);
    if (*s_bench) return cmd_benchmark(g, be);
    if (*s_serve) return run_stream(g, serve, serve.follow);
    if (*s_predict) return run_stream(g, predict, false);
    if (*s_dump) return cmd_dump(dump_model);
  } catch (const Error& e) {
    std::cerr << "edgebot: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "edgebot: io: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "edgebot: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
