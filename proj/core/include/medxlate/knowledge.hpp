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
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "medxlate/chat.hpp"
#include "medxlate/corpus.hpp"

namespace medxlate::knowledge {

struct MedicalConcept {
  std::string surface;
  std::string canonical;
  // Code point offsets [first, second) into the sentence.
  std::optional<std::pair<std::size_t, std::size_t>> span;

  bool operator==(const MedicalConcept&) const = default;
};

enum class Verdict { kAccept, kReject, kUnknown };

std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view name);  // throws SchemaError

struct MultilingualTranslations {
  std::string canonical;
  std::map<std::string, std::string> per_language;
  std::vector<std::string> absent;  // requested languages without an answer
  // Quality verdicts by language, present when quality checking ran.
  std::map<std::string, Verdict> verdicts;

  bool operator==(const MultilingualTranslations&) const = default;
};

struct SynonymSet {
  std::string canonical;
  std::map<std::string, std::vector<std::string>> per_language;
  std::vector<std::string> absent;

  bool operator==(const SynonymSet&) const = default;
};

struct UmlsDictEntry {
  std::string canonical;
  std::optional<std::string> cui;
  std::string source_term;
  std::string target_term;
  std::string source_lang;
  std::string target_lang;
  std::optional<Verdict> verdict;

  bool operator==(const UmlsDictEntry&) const = default;
};

struct ConceptEnrichment {
  std::string pair_id;
  std::vector<MedicalConcept> concepts;
  std::vector<MultilingualTranslations> multilingual;
  std::vector<SynonymSet> synonyms;
  std::vector<UmlsDictEntry> umls;
  std::string kb_model;
  std::string created_at;

  bool operator==(const ConceptEnrichment&) const = default;

  // Referential integrity: every sub-record names a listed concept.
  bool is_consistent() const;
};

// Seconds spent per enrichment stage for one sentence.
struct EnrichmentTimings {
  double keyword_extraction_s = 0.0;
  double keyword_translation_s = 0.0;  // mean per keyword
  double quality_check_s = 0.0;
};

// ---------------------------------------------------------------------------
// Cache

// Append-only JSONL store of raw KB answers keyed by request digest.
class KbCache {
 public:
  KbCache() = default;  // in-memory only
  explicit KbCache(std::filesystem::path path);

  static std::string key(std::string_view kb_model, std::string_view template_id,
                         std::string_view rendered_request);

  std::optional<std::string> get(const std::string& key);
  // The first stored value for a key wins; later puts are ignored.
  void put(const std::string& key, const std::string& value, std::string_view template_id);

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

// ---------------------------------------------------------------------------
// KB client

struct KbOptions {
  std::string kb_model;
  std::string source_lang = "en";
  std::string target_lang = "es";
  chat::RetryPolicy retry;
  chat::Sleeper sleeper = chat::real_sleeper();
};

// Renders the versioned KB templates, consults the cache and calls the
// backend. Safe to share between threads.
class KbClient {
 public:
  KbClient(chat::Backend& backend, KbOptions options, KbCache* cache = nullptr);

  // Raw answer for a template with the given fields, cache-through.
  std::string ask(const std::string& template_id, const std::map<std::string, std::string>& fields,
                  double temperature = 0.0);

  // Parses the answer as JSON of the accepted shape; otherwise asks once
  // more with the repair instruction and throws MalformedOutputError if that
  // fails too.
  nlohmann::json ask_json(const std::string& template_id,
                          const std::map<std::string, std::string>& fields,
                          const std::function<bool(const nlohmann::json&)>& accept);

  const KbOptions& options() const { return options_; }
  std::size_t backend_calls() const { return calls_.load(); }

 private:
  chat::Request make_request(const std::string& template_id,
                             const std::map<std::string, std::string>& fields) const;
  std::string call(const chat::Request& request);

  chat::Backend& backend_;
  KbOptions options_;
  KbCache* cache_;
  std::atomic<std::size_t> calls_{0};
};

// Parses free-form model output into JSON, tolerating code fences and
// surrounding prose. Returns nullopt when no JSON value can be recovered.
std::optional<nlohmann::json> parse_json_answer(std::string_view text);

std::vector<MedicalConcept> extract_keywords(std::string_view sentence, KbClient& kb);

// Resolves the first case-insensitive whole-word occurrence of `surface`.
std::optional<std::pair<std::size_t, std::size_t>> find_span(std::string_view sentence,
                                                             std::string_view surface);

MultilingualTranslations get_multilingual_translations(const MedicalConcept& mc,
                                                       const std::vector<std::string>& aux_langs,
                                                       KbClient& kb);

SynonymSet get_synonyms(const MedicalConcept& mc, const std::vector<std::string>& langs,
                        KbClient& kb);

Verdict parse_verdict(std::string_view answer);

Verdict quality_check_translation(std::string_view source_term, std::string_view target_term,
                                  std::string_view source_lang, std::string_view target_lang,
                                  KbClient& checker);

// ---------------------------------------------------------------------------
// UMLS snapshot

struct UmlsRow {
  std::string cui;
  std::string lang;
  std::string term;
  bool preferred = false;
};

// In-memory index over a TSV export with header `cui lang term preferred`.
class UmlsSnapshot {
 public:
  UmlsSnapshot() = default;
  explicit UmlsSnapshot(std::vector<UmlsRow> rows);

  static UmlsSnapshot load(const std::filesystem::path& path);
  static UmlsSnapshot parse(std::string_view tsv, std::string_view origin = "<memory>");

  const std::vector<UmlsRow>& rows() const { return rows_; }
  bool indexed() const { return indexed_; }

  // Row indices whose term matches exactly after canonicalization, or
  // loosely when there is no exact hit.
  std::vector<std::size_t> match(std::string_view canonical, std::string_view lang) const;
  std::vector<std::size_t> rows_for(const std::string& cui, std::string_view lang) const;

  // Snapshot terms of `lang` occurring in `sentence` as whole words, longest
  // match first, in sentence order.
  std::vector<std::string> find_terms(std::string_view sentence, std::string_view lang) const;

 private:
  void build_index();

  std::vector<UmlsRow> rows_;
  bool indexed_ = false;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> exact_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> loose_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> by_cui_;
  std::size_t max_term_words_ = 0;
};

std::vector<UmlsDictEntry> umls_lookup(const MedicalConcept& mc, const UmlsSnapshot& snapshot,
                                       std::string_view source_lang, std::string_view target_lang);

// For each CUI matching the concept in `source_lang`, one entry pairing the
// preferred `aux1` term with the preferred `aux2` term when both exist.
std::vector<UmlsDictEntry> umls_auxiliary_entries(const MedicalConcept& mc, const UmlsSnapshot& snapshot,
                                                  std::string_view source_lang, std::string_view aux1,
                                                  std::string_view aux2);

// ---------------------------------------------------------------------------
// Enrichment

struct EnrichmentConfig {
  std::vector<std::string> aux_langs = {"fr", "pt"};
  // Empty means the target language followed by the auxiliary languages.
  std::vector<std::string> synonym_langs;
  bool use_kb = true;
  bool quality_check = true;
  std::function<std::string()> clock;  // ISO-8601 timestamps; defaults to UTC now

  void validate() const;
  std::vector<std::string> effective_synonym_langs(std::string_view target_lang) const;
};

struct EnrichmentOutcome {
  ConceptEnrichment enrichment;
  EnrichmentTimings timings;
};

// `kb` may be null when config.use_kb is false; `snapshot` may be null to
// skip dictionary lookups.
EnrichmentOutcome enrich_sentence(const corpus::SentencePair& pair, const EnrichmentConfig& config,
                                  KbClient* kb, const UmlsSnapshot* snapshot);

std::vector<EnrichmentOutcome> enrich_all(const std::vector<corpus::SentencePair>& pairs,
                                          const EnrichmentConfig& config, KbClient* kb,
                                          const UmlsSnapshot* snapshot, unsigned jobs = 1);

std::string utc_now_iso8601();

nlohmann::json to_json(const ConceptEnrichment& enrichment);
ConceptEnrichment enrichment_from_json(const nlohmann::json& j);  // throws SchemaError

void export_enrichments(const std::vector<EnrichmentOutcome>& outcomes,
                        const std::filesystem::path& path);
std::vector<EnrichmentOutcome> load_enrichments(const std::filesystem::path& path);

}  // namespace medxlate::knowledge
