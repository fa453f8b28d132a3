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

#include "edgebot/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgebot/error.hpp"

namespace edgebot {

std::string iso8601_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

namespace {

struct Job {
  std::size_t seq = 0;
  std::size_t line_no = 0;
  std::optional<FlowRecord> record;
  std::string error_kind;
  std::string error;
};

struct Outcome {
  std::string text;  // empty when nothing is emitted
  bool attack = false;
  bool error = false;
};

// Immutable per-stream state shared by every worker.
class Classifier {
 public:
  explicit Classifier(const Artifact& a, const StreamOptions& options)
      : artifact_(a), options_(options), id_(a.id()) {
    if (!a.pipeline) {
      throw Error(ErrorKind::InvalidConfig, "artifact has no preprocessing pipeline");
    }
    const auto full = a.pipeline->full_feature_names();
    for (const auto& name : a.model.feature_names()) {
      auto it = std::find(full.begin(), full.end(), name);
      if (it == full.end()) {
        throw Error(ErrorKind::InvalidConfig, "model feature '" + name + "' not produced by pipeline");
      }
      index_.push_back(static_cast<std::size_t>(it - full.begin()));
    }
    width_ = a.pipeline->encoding.width();
  }

  std::size_t width() const { return width_; }
  std::size_t selected() const { return index_.size(); }

  Outcome run(const Job& job, std::vector<double>& scratch, std::vector<double>& x) const {
    Outcome o;
    nlohmann::json j;
    j["line"] = job.line_no;
    j["time"] = options_.fixed_time ? *options_.fixed_time : iso8601_now();
    if (!job.record) {
      o.error = true;
      j["error"] = job.error_kind;
      j["message"] = job.error;
      o.text = j.dump();
      return o;
    }
    const FlowRecord& r = *job.record;
    artifact_.pipeline->transform(r, scratch, index_, x);
    const bool attack = artifact_.model.predict(x) == 1;
    o.attack = attack;
    if (options_.alerts_only && !attack) return o;
    j["class"] = attack ? "Attack" : "Benign";
    j["score"] = artifact_.model.score(x);
    j["model_id"] = id_;
    j["uid"] = r.uid;
    j["orig_h"] = r.orig_h;
    j["orig_p"] = r.src_port;
    j["resp_h"] = r.resp_h;
    j["resp_p"] = r.dst_port;
    j["proto"] = std::string(to_string(r.proto));
    j["ts"] = r.ts ? nlohmann::json(*r.ts) : nlohmann::json(nullptr);
    o.text = j.dump();
    return o;
  }

 private:
  const Artifact& artifact_;
  const StreamOptions& options_;
  std::string id_;
  std::vector<std::size_t> index_;
  std::size_t width_ = 0;
};

// Returns false at end of input. Directives and blank lines yield no job.
class LineSource {
 public:
  explicit LineSource(std::istream& in) : in_(in), reader_(ConnLogReader::with_default_layout()) {}

  bool next(Job& job, StreamStats& stats) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      ++stats.lines;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      job = Job{};
      job.line_no = line_no_;
      try {
        job.record = reader_.feed(line, line_no_);
        if (!job.record) continue;
      } catch (const Error& e) {
        job.error_kind = std::string(to_string(e.kind()));
        job.error = e.what();
      }
      return true;
    }
    return false;
  }

 private:
  std::istream& in_;
  ConnLogReader reader_;
  std::size_t line_no_ = 0;
};

void tally(StreamStats& stats, const Outcome& o, std::ostream& out) {
  if (o.error) ++stats.errors;
  else ++stats.classified;
  if (o.attack) ++stats.alerts;
  if (!o.text.empty()) {
    out << o.text << '\n';
    if (!out) throw Error(ErrorKind::Io, "output sink closed");
    ++stats.emitted;
  }
}

StreamStats run_inline(const Classifier& c, std::istream& in, std::ostream& out) {
  StreamStats stats;
  LineSource source(in);
  std::vector<double> scratch(c.width()), x(c.selected());
  Job job;
  while (source.next(job, stats)) tally(stats, c.run(job, scratch, x), out);
  out.flush();
  return stats;
}

StreamStats run_pooled(const Classifier& c, std::istream& in, std::ostream& out,
                       const StreamOptions& options) {
  const std::size_t capacity = std::max<std::size_t>(1, options.queue_capacity);
  std::mutex mu;
  std::condition_variable can_read, can_work, can_write;
  std::deque<Job> queue;
  std::map<std::size_t, Outcome> done;
  std::size_t produced = 0;
  std::size_t written = 0;
  bool input_done = false;
  bool abort = false;
  StreamStats stats;
  std::exception_ptr failure;

  std::thread reader([&] {
    LineSource source(in);
    StreamStats local;
    Job job;
    try {
      while (source.next(job, local)) {
        std::unique_lock lock(mu);
        can_read.wait(lock, [&] { return abort || produced - written < capacity; });
        if (abort) return;
        job.seq = produced++;
        queue.push_back(std::move(job));
        can_work.notify_one();
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      abort = true;
    }
    std::lock_guard lock(mu);
    stats.lines = local.lines;
    input_done = true;
    can_work.notify_all();
    can_write.notify_all();
  });

  std::vector<std::thread> workers;
  for (unsigned w = 0; w < options.workers; ++w) {
    workers.emplace_back([&] {
      std::vector<double> scratch(c.width()), x(c.selected());
      for (;;) {
        Job job;
        {
          std::unique_lock lock(mu);
          can_work.wait(lock, [&] { return abort || !queue.empty() || input_done; });
          if (abort || queue.empty()) return;
          job = std::move(queue.front());
          queue.pop_front();
        }
        Outcome o;
        try {
          o = c.run(job, scratch, x);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          abort = true;
          can_read.notify_all();
          can_work.notify_all();
          can_write.notify_all();
          return;
        }
        std::lock_guard lock(mu);
        done.emplace(job.seq, std::move(o));
        can_write.notify_one();
      }
    });
  }

  // Ordered writer on the calling thread.
  for (;;) {
    Outcome o;
    {
      std::unique_lock lock(mu);
      can_write.wait(lock, [&] {
        return abort || done.count(written) > 0 || (input_done && written == produced);
      });
      if (abort || (input_done && written == produced && done.count(written) == 0)) break;
      auto it = done.find(written);
      o = std::move(it->second);
      done.erase(it);
    }
    try {
      tally(stats, o, out);
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      abort = true;
    }
    std::lock_guard lock(mu);
    ++written;
    can_read.notify_one();
    if (abort) {
      can_work.notify_all();
      break;
    }
  }
  {
    std::lock_guard lock(mu);
    abort = abort || failure != nullptr;
    can_read.notify_all();
    can_work.notify_all();
  }
  reader.join();
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  out.flush();
  return stats;
}

}  // namespace

StreamStats classify_stream(const Artifact& artifact, std::istream& in, std::ostream& out,
                            const StreamOptions& options) {
  const Classifier c(artifact, options);
  if (options.workers == 0) return run_inline(c, in, out);
  return run_pooled(c, in, out, options);
}

}  // namespace edgebot
