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
#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "medxlate/metrics.hpp"

namespace medxlate::metrics {

inline constexpr int kScorerProtocolVersion = 1;

struct ScorerTriple {
  std::string source;
  std::string hypothesis;
  std::string reference;
};

struct ScorerOptions {
  std::vector<std::string> args;
  double timeout_s = 300.0;  // per response line
  std::size_t stderr_tail_lines = 20;
};

// A running scorer sidecar speaking newline-delimited JSON over its standard
// streams. Requests are serialized; one handle is safe to share.
class ScorerHandle {
 public:
  // Starts the sidecar and completes the handshake. A missing executable
  // raises CapabilityError; a bad handshake raises ProtocolError.
  static std::unique_ptr<ScorerHandle> open(const std::filesystem::path& command,
                                            const ScorerOptions& options = {});
  ~ScorerHandle();
  ScorerHandle(const ScorerHandle&) = delete;
  ScorerHandle& operator=(const ScorerHandle&) = delete;

  const std::filesystem::path& command() const;
  int protocol_version() const;
  const std::vector<std::string>& capabilities() const;
  bool has_capability(const std::string& capability) const;

  // Capability "comet". One value per triple, in order.
  std::vector<double> score(const std::vector<ScorerTriple>& triples);
  // Capability "bert-embed". Rows are reference tokens, columns hypothesis tokens.
  SimilarityMatrix embed_similarity(const std::string& hypothesis, const std::string& reference);

  // Sends the shutdown request and waits for the process to exit.
  void close();

 private:
  struct Impl;
  explicit ScorerHandle(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

std::vector<MetricScore> score_external(ScorerHandle& handle, const std::vector<ScorerTriple>& triples);

MetricScore bertscore_external(ScorerHandle& handle, const std::string& hypothesis,
                               const std::string& reference);

}  // namespace medxlate::metrics
