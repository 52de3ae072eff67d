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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "medxlate/evaluate.hpp"
#include "medxlate/prompts.hpp"

namespace medxlate::stats {

// Two-sided 95% critical value of Student's t. Degrees of freedom above 30
// use the normal limit 1.960.
double t_critical_95(int df);

struct ConfidenceInterval {
  double mean = 0.0;
  double stddev = 0.0;
  double se = 0.0;
  double t_star = 0.0;
  double margin = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

ConfidenceInterval ci95(const std::vector<double>& values);  // n >= 2

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
// P(T <= t) for Student's t with `df` degrees of freedom (df may be fractional).
double student_t_cdf(double t, double df);

struct SignificanceResult {
  std::string condition_a;
  std::string condition_b;
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

inline constexpr double kAlpha = 0.05;

SignificanceResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b,
                                std::string condition_a = "a", std::string condition_b = "b");

enum class Block { kB1, kB2, kB3, kB4 };

std::string_view to_string(Block block);
Block block_from_string(std::string_view name);  // throws ConfigError
bool uses_medcod(Block block);
bool uses_finetuned(Block block);
Block block_for(bool medcod, bool finetuned);

// A model family evaluated with a base and a fine-tuned endpoint. Either
// endpoint name may be empty when that half of the grid is not run.
struct ModelFamily {
  std::string name;
  std::string base;
  std::string finetuned;
};

struct BlockMap {
  std::vector<ModelFamily> families;
  // Comparison baseline of each block; B2 and B3 against B1, B4 against B3.
  std::map<Block, Block> baselines = {{Block::kB2, Block::kB1}, {Block::kB3, Block::kB1},
                                      {Block::kB4, Block::kB3}};

  // Family and block for an endpoint name and strategy; nullopt when the
  // endpoint belongs to no family.
  std::optional<std::pair<std::string, Block>> classify(const std::string& model,
                                                        prompts::PromptStrategy strategy) const;
};

BlockMap block_map_from_json(const nlohmann::json& j);
nlohmann::json block_map_to_json(const BlockMap& map);
BlockMap load_block_map(const std::filesystem::path& path);

struct SampleSet {
  std::string model;  // family name
  Block block = Block::kB1;
  prompts::PromptStrategy strategy = prompts::PromptStrategy::kDirect;
  metrics::Metric metric = metrics::Metric::kBleu;
  std::vector<double> values;        // one per temperature run
  std::vector<double> temperatures;  // parallel to values

  std::string label() const;
};

// Groups corpus-level rows by (family, block, strategy, metric). Throws
// ConfigError for rows whose model belongs to no family.
std::vector<SampleSet> samples_from_report(const std::vector<metrics::ReportRow>& rows, const BlockMap& map);

struct SummaryRow {
  std::string model;
  Block block = Block::kB1;
  prompts::PromptStrategy strategy = prompts::PromptStrategy::kDirect;
  metrics::Metric metric = metrics::Metric::kBleu;
  ConfidenceInterval ci;
  std::optional<Block> baseline;
  std::optional<SignificanceResult> significance;
  bool starred = false;
};

// One row per sample set, sorted by (model, block, strategy, metric). A
// block with a declared baseline is tested against the baseline block's
// sample for the same strategy, or its only strategy. Throws ConfigError
// naming a missing baseline.
std::vector<SummaryRow> summarize(const std::vector<SampleSet>& samples, const BlockMap& map);

void export_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);
std::string summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace medxlate::stats
