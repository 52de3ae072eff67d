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

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace medxlate::metrics {

enum class Metric { kBleu, kChrfpp, kRougeLSum, kBertScore, kExternal };

std::string_view to_string(Metric metric);
Metric metric_from_string(std::string_view name);  // throws ConfigError

struct MetricScore {
  Metric metric = Metric::kBleu;
  double value = 0.0;
  // Formula symbols: p1..pN, BP, c, r (BLEU); P, R, beta (chrF++);
  // R_lcs, P_lcs, F_lcs (ROUGE); P_BERT, R_BERT, F_BERT (BERTScore).
  std::map<std::string, double> components;
  // Degenerate-input markers, e.g. "empty_hypothesis".
  std::vector<std::string> flags;

  bool has_flag(std::string_view flag) const;
};

// ---------------------------------------------------------------------------
// Tokenization

enum class TokenMode { kWord, kChar };

struct TokenizeOptions {
  bool lowercase = false;
};

struct TokenizedSegment {
  std::string raw;
  std::string normalized;           // tokens joined by single spaces
  std::vector<std::string> tokens;  // word mode
  std::u32string chars;             // char mode: NFC code points, whitespace removed
  // Word mode: exclusive end index into `tokens` of each newline-delimited
  // block. Always has at least one entry.
  std::vector<std::size_t> block_ends;
};

// Word mode: NFC, optional lowercase, split on Unicode whitespace, leading
// and trailing punctuation peeled into single-character tokens.
// Char mode: NFC code points with whitespace removed.
TokenizedSegment tokenize(std::string_view raw, TokenMode mode, const TokenizeOptions& options = {});

std::vector<std::string> word_tokens(std::string_view raw, const TokenizeOptions& options = {});

// ---------------------------------------------------------------------------
// N-gram counting

struct NGramCounts {
  int order = 1;
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t total = 0;  // == max(0, len - order + 1)
};

NGramCounts word_ngrams(std::span<const std::string> tokens, int order);
NGramCounts char_ngrams(std::u32string_view chars, int order);

// Sum over n-grams of min(hyp count, ref count).
std::size_t clipped_matches(const NGramCounts& hyp, const NGramCounts& ref);

// ---------------------------------------------------------------------------
// BLEU

struct BleuOptions {
  int max_order = 4;
  // Replaces zero matches at an order by epsilon (segment diagnostics only).
  bool smooth = false;
  double epsilon = 0.1;
};

// Sufficient statistics; sums over segments give the corpus statistics.
struct BleuStats {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  explicit BleuStats(int max_order = 4) : matches(max_order, 0), totals(max_order, 0) {}
  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(std::span<const std::string> hyp, std::span<const std::string> ref,
                     int max_order = 4);

// Orders with no hypothesis n-grams at all are left out of the geometric
// mean (weights renormalized over the remaining orders).
MetricScore bleu_from_stats(const BleuStats& stats, const BleuOptions& options = {});

MetricScore bleu_corpus(std::span<const TokenizedSegment> hyps, std::span<const TokenizedSegment> refs,
                        const BleuOptions& options = {});

MetricScore bleu_sentence(const TokenizedSegment& hyp, const TokenizedSegment& ref,
                          const BleuOptions& options = {});

double brevity_penalty(std::size_t hyp_length, std::size_t ref_length);

// ---------------------------------------------------------------------------
// chrF++

struct ChrfOptions {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
  bool lowercase = false;
};

struct OrderStats {
  std::size_t hyp = 0;
  std::size_t ref = 0;
  std::size_t match = 0;
};

// Char orders first, then word orders.
struct ChrfStats {
  std::vector<OrderStats> orders;
  ChrfStats& operator+=(const ChrfStats& other);
};

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, const ChrfOptions& options = {});
MetricScore chrf_from_stats(const ChrfStats& stats, const ChrfOptions& options = {});
MetricScore chrf_pp(std::string_view hyp, std::string_view ref, const ChrfOptions& options = {});
MetricScore chrf_pp_corpus(std::span<const std::string> hyps, std::span<const std::string> refs,
                           const ChrfOptions& options = {});

// ---------------------------------------------------------------------------
// ROUGE-L

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// Summary-level ROUGE-L: union LCS of every reference block against all
// hypothesis blocks, summed over reference blocks.
MetricScore rouge_l_sum(const TokenizedSegment& hyp, const TokenizedSegment& ref);
MetricScore rouge_l_sum(std::string_view hyp, std::string_view ref, const TokenizeOptions& options = {});

// ---------------------------------------------------------------------------
// BERTScore aggregation

class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static SimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  SimilarityMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Rows are reference tokens, columns hypothesis tokens.
MetricScore bertscore_from_similarity(const SimilarityMatrix& sim);

}  // namespace medxlate::metrics
