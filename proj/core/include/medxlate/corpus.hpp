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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace medxlate::corpus {

enum class Split { kTrain, kTest };

std::string_view to_string(Split split);
Split split_from_string(std::string_view name);  // throws SchemaError

struct ArticlePair {
  std::string article_id;
  std::string source_text;
  std::string target_text;
  std::optional<std::string> source_url;
  std::string fetched_at;  // ISO-8601, empty when unknown
};

struct SentencePair {
  std::string pair_id;
  std::string article_id;
  std::string source;
  std::string reference;
  std::size_t source_token_count = 0;
  Split split = Split::kTrain;

  bool operator==(const SentencePair&) const = default;
};

struct AlignedCorpus {
  std::vector<SentencePair> pairs;
  std::string provenance;  // digest of the ingestion configuration

  bool operator==(const AlignedCorpus&) const = default;

  const SentencePair* find(std::string_view pair_id) const;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestConfig {
  std::string source_lang = "en";
  std::string target_lang = "es";
  // Field names used by .json / .jsonl records.
  std::string id_field = "article_id";
  std::string source_field = "source_text";
  std::string target_field = "target_text";

  std::string digest() const;
};

struct IngestResult {
  std::vector<ArticlePair> articles;  // sorted by article_id
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

// Reads a directory (or a single .jsonl file) of paired records:
//   *.json   one article object
//   *.jsonl  one article object per line
//   <id>.<source_lang>.txt + <id>.<target_lang>.txt
// Records missing either side (or empty after cleaning) are skipped and
// counted. Texts are cleaned on the way in.
IngestResult ingest_articles(const std::filesystem::path& path, const IngestConfig& config);

// Strips markup, collapses whitespace, NFC-normalizes and trims. Idempotent.
std::string clean_text(std::string_view raw);

// ---------------------------------------------------------------------------
// Segmentation

// Rule-based splitter on terminal punctuation (. ! ? …) followed by
// whitespace, with an abbreviation exception list.
class SentenceSegmenter {
 public:
  explicit SentenceSegmenter(std::vector<std::string> abbreviations);

  // Uses the abbreviation list compiled into the library.
  static const SentenceSegmenter& standard();

  static std::vector<std::string> parse_abbreviations(std::string_view file_content);

  std::vector<std::string> split(std::string_view text) const;

 private:
  bool is_abbreviation(std::string_view word) const;

  std::vector<std::string> abbreviations_;
};

// ---------------------------------------------------------------------------
// Alignment

struct GaleChurchParams {
  double mean_ratio = 1.0;  // expected target chars per source char
  double variance = 6.8;    // per-character variance of the length difference
  double prior_1_1 = 0.89;
  double prior_1_0 = 0.0099;  // same for 0-1
  double prior_2_1 = 0.089;   // same for 1-2
  double prior_2_2 = 0.011;
  // When false, 1-0 and 0-1 beads are charged their prior only.
  bool length_cost_on_deletions = false;
};

struct Bead {
  std::size_t source_begin = 0;
  std::size_t source_count = 0;
  std::size_t target_begin = 0;
  std::size_t target_count = 0;

  bool is_one_to_one() const { return source_count == 1 && target_count == 1; }
  bool operator==(const Bead&) const = default;
};

// Minimum-cost bead sequence covering both length lists. Lengths are in
// characters.
std::vector<Bead> gale_church_align(std::span<const std::size_t> source_lengths,
                                    std::span<const std::size_t> target_lengths,
                                    const GaleChurchParams& params = {});

struct AlignmentStats {
  std::size_t source_sentences = 0;
  std::size_t target_sentences = 0;
  std::size_t kept = 0;
  std::size_t dropped_beads = 0;  // 1-0, 0-1 and n-m beads
};

struct AlignmentResult {
  std::vector<SentencePair> pairs;  // 1-1 beads only, source order
  std::vector<Bead> beads;          // full bead sequence
  AlignmentStats stats;
};

// Aligns pre-segmented sentences. Throws InvalidArgument when either side
// is empty.
AlignmentResult align_segments(std::string_view article_id,
                               const std::vector<std::string>& source_sentences,
                               const std::vector<std::string>& target_sentences,
                               const GaleChurchParams& params = {});

// Segments both cleaned texts, then aligns them.
AlignmentResult align_sentences(const ArticlePair& pair,
                                const SentenceSegmenter& segmenter = SentenceSegmenter::standard(),
                                const GaleChurchParams& params = {});

struct BuildStats {
  std::size_t articles = 0;
  std::size_t failed_articles = 0;
  AlignmentStats totals;
};

// Aligns every article (in parallel when jobs > 1) and concatenates the
// pairs ordered by (article_id, source position).
AlignedCorpus build_corpus(const std::vector<ArticlePair>& articles, const IngestConfig& config,
                           unsigned jobs = 1, BuildStats* stats = nullptr);

// ---------------------------------------------------------------------------
// Splits

// Tags exactly `test_size` pairs as test, stratified over source token-count
// terciles, deterministic for a given seed. Throws InvalidArgument when
// test_size exceeds the corpus.
AlignedCorpus split_corpus(const AlignedCorpus& corpus, std::size_t test_size, std::uint64_t seed);

// Indices of `pairs` in tercile order: ascending source_token_count, ties by
// pair_id, cut into three near-equal groups (larger groups first).
std::vector<std::vector<std::size_t>> token_length_terciles(const std::vector<SentencePair>& pairs);

// ---------------------------------------------------------------------------
// Serialization (JSON Lines, schema version 1)

inline constexpr int kCorpusSchemaVersion = 1;

std::string serialize_corpus(const AlignedCorpus& corpus);
void export_corpus(const AlignedCorpus& corpus, const std::filesystem::path& path);

struct LoadResult {
  AlignedCorpus corpus;
  std::vector<std::string> warnings;
};

LoadResult load_corpus(const std::filesystem::path& path);

}  // namespace medxlate::corpus
