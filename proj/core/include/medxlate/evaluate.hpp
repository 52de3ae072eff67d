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
#include <map>
#include <string>
#include <vector>

#include "medxlate/corpus.hpp"
#include "medxlate/metrics.hpp"
#include "medxlate/scorer.hpp"
#include "medxlate/translate.hpp"

namespace medxlate::metrics {

enum class RowLevel { kCorpus, kSegment };

std::string_view to_string(RowLevel level);

// One score for a (model, strategy, temperature) cell, or for one segment of
// that cell when `level` is kSegment.
struct ReportRow {
  RowLevel level = RowLevel::kCorpus;
  std::string model;
  prompts::PromptStrategy strategy = prompts::PromptStrategy::kDirect;
  double temperature = 0.0;
  std::string pair_id;  // segment rows only
  Metric metric = Metric::kBleu;
  double value = 0.0;
  std::map<std::string, double> components;
  std::vector<std::string> flags;
  std::size_t segments = 0;       // corpus rows: scored segments
  std::size_t failed_cells = 0;   // corpus rows: results without a hypothesis

  bool operator==(const ReportRow&) const = default;
};

struct EvaluateOptions {
  std::vector<Metric> metrics = {Metric::kBleu, Metric::kChrfpp, Metric::kRougeLSum};
  bool lowercase = false;
  BleuOptions bleu;
  ChrfOptions chrf;
  bool segment_rows = true;
};

std::vector<Metric> parse_metric_list(const std::string& text);

// Corpus-level and segment-level rows for every cell in `results`. External
// metrics need `handle`; they are skipped when it is null. Throws
// InvalidArgument naming a pair_id absent from `corpus`.
std::vector<ReportRow> score_run(const std::vector<translate::TranslationResult>& results,
                                 const std::vector<corpus::SentencePair>& corpus,
                                 const EvaluateOptions& options = {}, ScorerHandle* handle = nullptr);

nlohmann::json to_json(const ReportRow& row);
ReportRow row_from_json(const nlohmann::json& j);

void export_report_jsonl(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
void export_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
std::vector<ReportRow> load_report(const std::filesystem::path& path);

std::string format_number(double value);

}  // namespace medxlate::metrics
