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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "medxlate/chat.hpp"
#include "medxlate/evaluate.hpp"
#include "medxlate/stats.hpp"
#include "medxlate/translate.hpp"

namespace medxlate::harness {

struct FamilySpec {
  std::string name;
  std::optional<chat::EndpointConfig> base;
  std::optional<chat::EndpointConfig> finetuned;
};

struct EnrichmentSpec {
  std::optional<chat::EndpointConfig> kb;
  std::filesystem::path umls;
  bool quality_check = true;
  std::vector<std::string> synonym_langs;

  bool present() const { return kb.has_value() || !umls.empty(); }
};

struct ExperimentSpec {
  std::string name;
  // Exactly one of `corpus` (aligned JSONL) and `articles` (raw article
  // directory, aligned and split on the fly) is set.
  std::filesystem::path corpus;
  std::filesystem::path articles;
  std::size_t test_size = 0;
  std::uint64_t split_seed = 13;
  std::string split = "test";  // "test", "train" or "all"
  std::size_t limit = 0;       // 0: every selected pair

  std::string source_lang = "en";
  std::string target_lang = "es";
  std::vector<std::string> aux_langs = {"fr", "pt"};

  std::vector<FamilySpec> families;
  std::vector<stats::Block> blocks = {stats::Block::kB1, stats::Block::kB2, stats::Block::kB3,
                                      stats::Block::kB4};
  std::map<stats::Block, std::vector<prompts::PromptStrategy>> strategies;
  std::vector<double> temperatures = translate::kDefaultTemperatures;
  std::vector<metrics::Metric> metrics = {metrics::Metric::kBleu, metrics::Metric::kChrfpp,
                                          metrics::Metric::kRougeLSum};
  bool lowercase = false;
  EnrichmentSpec enrichment;
  std::filesystem::path scorer;
  std::vector<std::string> scorer_args;
  std::map<stats::Block, stats::Block> baselines = stats::BlockMap{}.baselines;
  std::string seed_note;
  unsigned jobs = 4;

  // Strategies of a block: the configured list, else direct for B1/B3 and
  // every structured strategy for B2/B4.
  std::vector<prompts::PromptStrategy> strategies_for(stats::Block block) const;
  stats::BlockMap block_map() const;
  void validate() const;  // throws ConfigError
};

// Relative paths resolve against `base_dir`. Endpoint entries are either
// inline objects or paths to endpoint JSON files.
ExperimentSpec spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
ExperimentSpec load_spec(const std::filesystem::path& path);

struct ResultTable {
  int format_version = 1;
  std::vector<stats::SummaryRow> rows;
};

void sort_table(ResultTable& table);

struct Selection {
  std::string model;
  bool finetuned = false;
  metrics::Metric metric = metrics::Metric::kBleu;
  prompts::PromptStrategy strategy = prompts::PromptStrategy::kDirect;
  stats::Block block = stats::Block::kB1;
  double mean = 0.0;
  bool tie = false;
};

// Per (model, fine-tuned flag, metric): the strategy with the highest mean.
// Ties go to the first strategy in enum order and set `tie`.
std::vector<Selection> best_per_model(const ResultTable& table);

struct TimingReport {
  translate::StageTimings means;
  std::size_t results = 0;

  std::string markdown() const;
  nlohmann::json to_json() const;
};

TimingReport timing_report(const std::vector<translate::TranslationResult>& results);

enum class ReportFormat { kCsv, kMarkdown, kPlotData };

std::set<ReportFormat> parse_formats(const std::string& text);

std::string summary_markdown(const ResultTable& table);
nlohmann::json plot_data(const ResultTable& table);

// Writes summary.csv, summary.md and plotdata.json (as selected) into
// `out_dir`, creating it when needed.
void emit_report(const ResultTable& table, const std::filesystem::path& out_dir,
                 const std::set<ReportFormat>& formats = {ReportFormat::kCsv, ReportFormat::kMarkdown,
                                                          ReportFormat::kPlotData});

struct RunOptions {
  chat::Sleeper sleeper;
  translate::Timer timer;
  std::function<void(const std::string&)> log;
  const std::atomic<bool>* cancel = nullptr;
};

struct ExperimentOutcome {
  ResultTable table;
  std::vector<translate::TranslationResult> results;
  std::size_t skipped_cells = 0;
  std::size_t new_cells = 0;
  std::size_t failed_cells = 0;
  std::optional<TimingReport> timing;
  std::vector<std::string> warnings;
};

// Runs enrichment, sweeps, scoring and statistics for every block and
// writes the artifacts into `out_dir`. Completed cells recorded in
// `out_dir/results.jsonl` are not requested again.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir,
                                 const RunOptions& options = {});

// Rebuilds the result table from a finished run directory.
ResultTable table_from_run_dir(const std::filesystem::path& run_dir);

}  // namespace medxlate::harness
