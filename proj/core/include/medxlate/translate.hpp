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

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "medxlate/chat.hpp"
#include "medxlate/corpus.hpp"
#include "medxlate/knowledge.hpp"
#include "medxlate/prompts.hpp"

namespace medxlate::translate {

inline const std::vector<double> kDefaultTemperatures = {0.2, 0.3, 0.4, 0.5, 0.6};

struct StageTimings {
  double keyword_extraction_s = 0.0;
  double keyword_translation_s = 0.0;
  double quality_check_s = 0.0;
  double final_translation_s = 0.0;
  double total_s = 0.0;

  void recompute_total();
  bool operator==(const StageTimings&) const = default;
};

struct RunConfig {
  std::vector<double> temperatures = kDefaultTemperatures;
  std::vector<prompts::PromptStrategy> strategies = {prompts::kAllStrategies.begin(),
                                                     prompts::kAllStrategies.end()};
  chat::EndpointConfig model;
  std::string seed_note;
  prompts::RenderOptions render;

  void validate() const;  // throws ConfigError
};

std::vector<double> parse_temperature_list(const std::string& text);

struct TranslationResult {
  std::string pair_id;
  prompts::PromptStrategy strategy = prompts::PromptStrategy::kDirect;
  double temperature = 0.0;
  std::string hypothesis;
  StageTimings timing;
  std::string model_name;
  int attempt_count = 0;
  std::string raw_response_digest;
  bool degraded = false;
  std::string template_version;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
  bool operator==(const TranslationResult&) const = default;
};

// Strips code fences, a leading "Translation:" label and an echoed first
// instruction line. Throws EndpointError when nothing is left.
std::string extract_translation(const std::string& raw, const std::string& instruction_line = {});

// Returns seconds on a monotonic scale.
using Timer = std::function<double()>;
Timer steady_timer();

struct CallOptions {
  chat::RetryPolicy retry;
  chat::Sleeper sleeper;
  Timer timer;
};

TranslationResult translate_one(const prompts::RenderedPrompt& prompt, chat::Backend& backend,
                                double temperature, const CallOptions& options = {},
                                int* attempts = nullptr);

std::string cell_digest(const std::string& pair_id, prompts::PromptStrategy strategy,
                        double temperature, const std::string& model_name,
                        const std::string& template_version);
std::string cell_digest(const TranslationResult& result);

struct SweepHooks {
  // Called once per finished cell, possibly from several threads at once.
  std::function<void(const TranslationResult&)> on_result;
  // Digests of cells that are already done and must not be requested again.
  std::set<std::string> completed;
  const std::atomic<bool>* cancel = nullptr;
  chat::Sleeper sleeper;
  Timer timer;
};

// Runs every (pair, strategy, temperature) cell with at most
// `config.model.max_concurrent` requests in flight. Per-cell failures are
// recorded in the result; only configuration problems throw.
std::vector<TranslationResult> sweep(const std::vector<corpus::SentencePair>& pairs,
                                     const std::vector<knowledge::EnrichmentOutcome>& enrichments,
                                     const RunConfig& config, chat::Backend& backend,
                                     const SweepHooks& hooks = {});

void sort_results(std::vector<TranslationResult>& results);

StageTimings timing_summary(const std::vector<TranslationResult>& results);

nlohmann::json to_json(const TranslationResult& result);
TranslationResult result_from_json(const nlohmann::json& j);

void export_results(const std::vector<TranslationResult>& results, const std::filesystem::path& path);
std::vector<TranslationResult> load_results(const std::filesystem::path& path);

// Appends one JSONL record and flushes, for incremental writes during a sweep.
class ResultWriter {
 public:
  explicit ResultWriter(const std::filesystem::path& path);
  ~ResultWriter();
  ResultWriter(const ResultWriter&) = delete;
  ResultWriter& operator=(const ResultWriter&) = delete;

  void write(const TranslationResult& result);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace medxlate::translate
