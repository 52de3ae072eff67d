// Copyright 2026 The medxlate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "medxlate/scorer.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include <boost/process.hpp>
#include <json.hpp>

#include "medxlate/error.hpp"

namespace medxlate::metrics {

namespace fs = std::filesystem;
namespace bp = boost::process;
using Json = nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

namespace {

fs::path unique_stderr_path() {
  static std::atomic<unsigned> counter{0};
  return fs::temp_directory_path() /
         ("medxlate-scorer-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".log");
}

std::string tail_lines(const fs::path& path, std::size_t n) {
  std::ifstream in(path);
  std::deque<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.push_back(line);
    if (lines.size() > n) lines.pop_front();
  }
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += l;
  }
  return out;
}

}  // namespace

struct ScorerHandle::Impl {
  fs::path command;
  ScorerOptions options;
  fs::path stderr_path;
  bp::opstream in;
  bp::ipstream out;
  bp::child child;
  std::mutex request_mutex;
  long next_id = 1;
  std::size_t line_number = 0;
  int protocol_version = 0;
  std::vector<std::string> capabilities;
  bool closed = false;

  std::mutex wd_mutex;
  std::condition_variable wd_cv;
  std::optional<SteadyClock::time_point> deadline;
  bool wd_stop = false;
  bool timed_out = false;
  std::thread watchdog;

  void start_watchdog() {
    watchdog = std::thread([this] {
      std::unique_lock lock(wd_mutex);
      while (!wd_stop) {
        if (!deadline) {
          wd_cv.wait(lock);
          continue;
        }
        const auto until = *deadline;
        wd_cv.wait_until(lock, until);
        if (deadline && SteadyClock::now() >= *deadline) {
          timed_out = true;
          deadline.reset();
          std::error_code ec;
          child.terminate(ec);
        }
      }
    });
  }

  void stop_watchdog() {
    {
      std::lock_guard lock(wd_mutex);
      wd_stop = true;
    }
    wd_cv.notify_all();
    if (watchdog.joinable()) watchdog.join();
  }

  std::string prefix() const { return "scorer '" + command.string() + "'"; }

  [[noreturn]] void fail_dead(const std::string& what) {
    std::error_code ec;
    bool was_timeout = false;
    {
      std::lock_guard lock(wd_mutex);
      was_timeout = timed_out;
    }
    if (child.valid() && child.running(ec)) child.terminate(ec);
    if (child.valid()) child.wait(ec);
    closed = true;
    if (was_timeout) {
      throw TransportError(prefix() + ": no response within " + std::to_string(options.timeout_s) +
                           " s while " + what);
    }
    const int status = child.valid() ? child.exit_code() : -1;
    std::string message = prefix() + " exited with status " + std::to_string(status) + " while " + what;
    const std::string tail = tail_lines(stderr_path, options.stderr_tail_lines);
    if (!tail.empty()) message += "; stderr tail:\n" + tail;
    throw ProtocolError(message);
  }

  std::string read_line(const std::string& what) {
    {
      std::lock_guard lock(wd_mutex);
      deadline = SteadyClock::now() + std::chrono::duration_cast<SteadyClock::duration>(
                                          std::chrono::duration<double>(options.timeout_s));
    }
    wd_cv.notify_all();
    std::string line;
    const bool ok = static_cast<bool>(std::getline(out, line));
    {
      std::lock_guard lock(wd_mutex);
      deadline.reset();
    }
    if (!ok) fail_dead(what);
    ++line_number;
    return line;
  }

  Json parse_line(const std::string& line) const {
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ProtocolError(prefix() + ": response line " + std::to_string(line_number) +
                          " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) {
      throw ProtocolError(prefix() + ": response line " + std::to_string(line_number) +
                          " is not a JSON object");
    }
    return j;
  }

  void write_line(const Json& j, const std::string& what) {
    in << j.dump() << '\n' << std::flush;
    if (!in) fail_dead(what);
  }

  Json request(Json body, const std::string& op) {
    std::lock_guard lock(request_mutex);
    if (closed) throw ProtocolError(prefix() + " is closed");
    const long id = next_id++;
    body["id"] = id;
    body["op"] = op;
    const std::string what = "handling request " + std::to_string(id) + " (" + op + ")";
    write_line(body, what);
    const Json j = parse_line(read_line(what));
    const std::string at = prefix() + ": response line " + std::to_string(line_number);
    if (!j.contains("id") || !j.at("id").is_number_integer() || j.at("id").get<long>() != id) {
      throw ProtocolError(at + " does not answer request id " + std::to_string(id));
    }
    if (j.contains("error")) {
      const auto& e = j.at("error");
      throw EndpointError(prefix() + " reported an error for request " + std::to_string(id) + ": " +
                          (e.is_string() ? e.get<std::string>() : e.dump()));
    }
    if (!j.contains("value")) throw ProtocolError(at + " has neither 'value' nor 'error'");
    return j.at("value");
  }

  void handshake() {
    const Json j = parse_line(read_line("waiting for the handshake"));
    const std::string at = prefix() + ": handshake line " + std::to_string(line_number);
    if (!j.contains("hello") || !j.at("hello").is_object()) throw ProtocolError(at + " lacks 'hello'");
    const auto& hello = j.at("hello");
    if (!hello.contains("protocol") || !hello.at("protocol").is_number_integer()) {
      throw ProtocolError(at + " lacks an integer 'protocol'");
    }
    protocol_version = hello.at("protocol").get<int>();
    if (protocol_version != kScorerProtocolVersion) {
      throw ProtocolError(at + ": protocol " + std::to_string(protocol_version) + " is not supported (expected " +
                          std::to_string(kScorerProtocolVersion) + ")");
    }
    if (!hello.contains("capabilities") || !hello.at("capabilities").is_array()) {
      throw ProtocolError(at + " lacks a 'capabilities' array");
    }
    for (const auto& c : hello.at("capabilities")) {
      if (!c.is_string()) throw ProtocolError(at + ": capabilities must be strings");
      capabilities.push_back(c.get<std::string>());
    }
  }

  void shutdown() {
    std::lock_guard lock(request_mutex);
    if (closed) return;
    closed = true;
    std::error_code ec;
    if (child.running(ec)) {
      in << Json{{"id", next_id++}, {"op", "shutdown"}}.dump() << '\n' << std::flush;
      in.pipe().close();
      const auto limit = SteadyClock::now() + std::chrono::seconds(5);
      while (child.running(ec) && SteadyClock::now() < limit) {
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      if (child.running(ec)) child.terminate(ec);
    }
    child.wait(ec);
  }
};

ScorerHandle::ScorerHandle(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

ScorerHandle::~ScorerHandle() {
  if (!impl_) return;
  try {
    impl_->shutdown();
  } catch (...) {
  }
  impl_->stop_watchdog();
  std::error_code ec;
  fs::remove(impl_->stderr_path, ec);
}

std::unique_ptr<ScorerHandle> ScorerHandle::open(const fs::path& command, const ScorerOptions& options) {
  std::error_code ec;
  if (command.empty() || !fs::is_regular_file(command, ec) || ::access(command.c_str(), X_OK) != 0) {
    throw CapabilityError("scorer sidecar '" + command.string() + "' is not an executable file");
  }
  std::signal(SIGPIPE, SIG_IGN);
  auto impl = std::make_unique<Impl>();
  impl->command = command;
  impl->options = options;
  impl->stderr_path = unique_stderr_path();
  try {
    impl->child = bp::child(bp::exe = command.string(), bp::args = options.args, bp::std_in < impl->in,
                            bp::std_out > impl->out, bp::std_err > impl->stderr_path.string());
  } catch (const bp::process_error& e) {
    throw CapabilityError("cannot start scorer sidecar '" + command.string() + "': " + e.what());
  }
  impl->start_watchdog();
  std::unique_ptr<ScorerHandle> handle(new ScorerHandle(std::move(impl)));
  handle->impl_->handshake();
  return handle;
}

const fs::path& ScorerHandle::command() const { return impl_->command; }
int ScorerHandle::protocol_version() const { return impl_->protocol_version; }
const std::vector<std::string>& ScorerHandle::capabilities() const { return impl_->capabilities; }

bool ScorerHandle::has_capability(const std::string& capability) const {
  const auto& caps = impl_->capabilities;
  return std::find(caps.begin(), caps.end(), capability) != caps.end();
}

std::vector<double> ScorerHandle::score(const std::vector<ScorerTriple>& triples) {
  if (!has_capability("comet")) {
    throw CapabilityError(impl_->prefix() + " does not offer the 'comet' capability");
  }
  Json body;
  body["triples"] = Json::array();
  for (const auto& t : triples) {
    body["triples"].push_back({{"src", t.source}, {"hyp", t.hypothesis}, {"ref", t.reference}});
  }
  const Json value = impl_->request(std::move(body), "score");
  const std::string at = impl_->prefix() + ": response line " + std::to_string(impl_->line_number);
  if (!value.is_array() || value.size() != triples.size()) {
    throw ProtocolError(at + ": expected an array of " + std::to_string(triples.size()) + " scores");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) throw ProtocolError(at + ": scores must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

SimilarityMatrix ScorerHandle::embed_similarity(const std::string& hypothesis, const std::string& reference) {
  if (!has_capability("bert-embed")) {
    throw CapabilityError(impl_->prefix() + " does not offer the 'bert-embed' capability");
  }
  const Json value = impl_->request({{"hyp", hypothesis}, {"ref", reference}}, "embed-sim");
  const std::string at = impl_->prefix() + ": response line " + std::to_string(impl_->line_number);
  if (!value.is_array() || value.empty()) throw ProtocolError(at + ": expected a non-empty matrix");
  std::vector<std::vector<double>> rows;
  for (const auto& row : value) {
    if (!row.is_array() || row.empty() || row.size() != value.front().size()) {
      throw ProtocolError(at + ": matrix rows must be non-empty and of equal length");
    }
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number()) throw ProtocolError(at + ": matrix entries must be numbers");
      r.push_back(v.get<double>());
    }
    rows.push_back(std::move(r));
  }
  return SimilarityMatrix::from_rows(rows);
}

void ScorerHandle::close() { impl_->shutdown(); }

std::vector<MetricScore> score_external(ScorerHandle& handle, const std::vector<ScorerTriple>& triples) {
  std::vector<MetricScore> out;
  for (const double v : handle.score(triples)) {
    MetricScore s;
    s.metric = Metric::kExternal;
    s.value = v;
    out.push_back(std::move(s));
  }
  return out;
}

MetricScore bertscore_external(ScorerHandle& handle, const std::string& hypothesis,
                               const std::string& reference) {
  return bertscore_from_similarity(handle.embed_similarity(hypothesis, reference));
}

}  // namespace medxlate::metrics
