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

#include "medxlate/knowledge.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "medxlate/digest.hpp"
#include "medxlate/error.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/languages.hpp"
#include "medxlate/metrics.hpp"
#include "medxlate/resources.hpp"
#include "medxlate/text.hpp"

namespace medxlate::knowledge {

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTemplateDir = "kb/v1/";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string template_text(const std::string& template_id) {
  const auto text = resources::lookup(std::string(kTemplateDir) + template_id + ".txt");
  if (!text) throw ConfigError("unknown knowledge-base template '" + template_id + "'");
  return std::string(*text);
}

std::string join_langs(const std::vector<std::string>& langs) { return text::join(langs, ", "); }

// Rethrows the current component error with the concept prepended.
[[noreturn]] void rethrow_for_concept(const std::string& key) {
  const std::string prefix = "concept '" + key + "': ";
  try {
    throw;
  } catch (const TransportError& e) {
    throw TransportError(prefix + e.what());
  } catch (const AuthError& e) {
    throw AuthError(prefix + e.what());
  } catch (const EndpointError& e) {
    throw EndpointError(prefix + e.what());
  } catch (const MalformedOutputError& e) {
    throw MalformedOutputError(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  }
}

template <typename F>
auto for_concept(const std::string& key, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const TransportError&) {
    rethrow_for_concept(key);
  } catch (const AuthError&) {
    rethrow_for_concept(key);
  } catch (const EndpointError&) {
    rethrow_for_concept(key);
  } catch (const MalformedOutputError&) {
    rethrow_for_concept(key);
  } catch (const InvalidArgument&) {
    rethrow_for_concept(key);
  }
}

std::vector<std::string> string_list(const Json& value) {
  std::vector<std::string> out;
  auto add = [&](const Json& v) {
    if (!v.is_string()) return;
    std::string term = text::collapse_whitespace(text::nfc(v.get<std::string>()));
    if (term.empty()) return;
    const std::string canon = text::canonical_term(term);
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const std::string& t) { return text::canonical_term(t) == canon; });
    if (!dup) out.push_back(std::move(term));
  };
  if (value.is_array()) {
    for (const auto& v : value) add(v);
  } else {
    add(value);
  }
  return out;
}

}  // namespace

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kAccept:
      return "accept";
    case Verdict::kReject:
      return "reject";
    case Verdict::kUnknown:
      return "unknown";
  }
  return "unknown";
}

Verdict verdict_from_string(std::string_view name) {
  if (name == "accept") return Verdict::kAccept;
  if (name == "reject") return Verdict::kReject;
  if (name == "unknown") return Verdict::kUnknown;
  throw SchemaError("unknown verdict '" + std::string(name) + "'");
}

bool ConceptEnrichment::is_consistent() const {
  auto known = [&](const std::string& c) {
    return std::any_of(concepts.begin(), concepts.end(),
                       [&](const MedicalConcept& m) { return m.canonical == c; });
  };
  return std::all_of(multilingual.begin(), multilingual.end(), [&](const auto& m) { return known(m.canonical); }) &&
         std::all_of(synonyms.begin(), synonyms.end(), [&](const auto& s) { return known(s.canonical); }) &&
         std::all_of(umls.begin(), umls.end(), [&](const auto& u) { return known(u.canonical); });
}

// ---------------------------------------------------------------------------
// Cache

KbCache::KbCache(fs::path path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      entries_.emplace(j.at("key").get<std::string>(), j.at("value").get<std::string>());
    } catch (const Json::exception&) {
      // A torn final line from an interrupted run; the entry is recomputed.
    }
  }
}

std::string KbCache::key(std::string_view kb_model, std::string_view template_id,
                         std::string_view rendered_request) {
  std::string material;
  material.reserve(kb_model.size() + template_id.size() + rendered_request.size() + 2);
  material.append(kb_model).push_back('\x1f');
  material.append(template_id).push_back('\x1f');
  material.append(rendered_request);
  return sha256_hex(material);
}

std::optional<std::string> KbCache::get(const std::string& key) {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void KbCache::put(const std::string& key, const std::string& value, std::string_view template_id) {
  std::unique_lock lock(mutex_);
  if (!entries_.emplace(key, value).second) return;
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to cache " + path_.string());
  out << jsonl::dump_line({{"key", key}, {"template", template_id}, {"value", value}}) << '\n';
  out.flush();
  if (!out) throw IoError("write failed for cache " + path_.string());
}

std::size_t KbCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// KB client

KbClient::KbClient(chat::Backend& backend, KbOptions options, KbCache* cache)
    : backend_(backend), options_(std::move(options)), cache_(cache) {
  if (options_.kb_model.empty()) options_.kb_model = backend_.model_name();
}

chat::Request KbClient::make_request(const std::string& template_id,
                                     const std::map<std::string, std::string>& fields) const {
  std::map<std::string, std::string> vars = fields;
  vars.emplace("source_lang", options_.source_lang);
  vars.emplace("target_lang", options_.target_lang);
  vars["source_name"] = languages::english_name(vars["source_lang"]);
  vars["target_name"] = languages::english_name(vars["target_lang"]);
  chat::Request request;
  request.messages.push_back({"user", text::substitute(template_text(template_id), vars)});
  request.task = "kb." + template_id;
  request.fields = std::move(vars);
  return request;
}

std::string KbClient::call(const chat::Request& request) {
  ++calls_;
  auto response = chat::complete_with_retries(backend_, request, options_.retry, options_.sleeper);
  return std::move(response.text);
}

std::string KbClient::ask(const std::string& template_id,
                          const std::map<std::string, std::string>& fields, double temperature) {
  auto request = make_request(template_id, fields);
  request.temperature = temperature;
  const std::string key = KbCache::key(options_.kb_model, std::string(kTemplateDir) + template_id,
                                       request.messages.front().content);
  if (cache_) {
    if (auto hit = cache_->get(key)) return *hit;
  }
  std::string answer = call(request);
  if (cache_) cache_->put(key, answer, std::string(kTemplateDir) + template_id);
  return answer;
}

Json KbClient::ask_json(const std::string& template_id, const std::map<std::string, std::string>& fields,
                        const std::function<bool(const Json&)>& accept) {
  const std::string first = ask(template_id, fields);
  if (auto parsed = parse_json_answer(first); parsed && accept(*parsed)) return *parsed;

  auto request = make_request(template_id, fields);
  request.messages.push_back({"assistant", first});
  request.messages.push_back({"user", template_text("json_repair")});
  request.fields["repair"] = "1";
  const std::string key =
      KbCache::key(options_.kb_model, std::string(kTemplateDir) + "json_repair",
                   request.messages[0].content + '\x1f' + first);
  std::optional<std::string> second;
  if (cache_) second = cache_->get(key);
  if (!second) {
    second = call(request);
    if (cache_) cache_->put(key, *second, std::string(kTemplateDir) + "json_repair");
  }
  if (auto parsed = parse_json_answer(*second); parsed && accept(*parsed)) return *parsed;
  throw MalformedOutputError(template_id + ": answer is not valid JSON of the expected shape after a repair request: " +
                             second->substr(0, 120));
}

std::optional<Json> parse_json_answer(std::string_view raw) {
  auto try_parse = [](std::string_view s) -> std::optional<Json> {
    auto j = Json::parse(s.begin(), s.end(), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  };
  std::string s = text::trim(raw);
  if (auto j = try_parse(s)) return j;
  const auto fence = s.find("```");
  if (fence != std::string::npos) {
    auto body_begin = s.find('\n', fence);
    const auto close = s.find("```", fence + 3);
    if (body_begin != std::string::npos && close != std::string::npos && close > body_begin) {
      if (auto j = try_parse(s.substr(body_begin + 1, close - body_begin - 1))) return j;
    }
  }
  for (const auto& [open, shut] : {std::pair{'[', ']'}, std::pair{'{', '}'}}) {
    const auto b = s.find(open);
    const auto e = s.rfind(shut);
    if (b != std::string::npos && e != std::string::npos && e > b) {
      if (auto j = try_parse(std::string_view(s).substr(b, e - b + 1))) return j;
    }
  }
  return std::nullopt;
}

std::optional<std::pair<std::size_t, std::size_t>> find_span(std::string_view sentence,
                                                             std::string_view surface) {
  const std::u32string hay = text::to_u32(text::lowercase(text::nfc(sentence)));
  const std::u32string needle = text::to_u32(text::lowercase(text::nfc(surface)));
  if (needle.empty() || hay.size() != text::to_u32(text::nfc(sentence)).size()) return std::nullopt;
  for (std::size_t pos = hay.find(needle); pos != std::u32string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || !text::is_alnum(hay[pos - 1]);
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == hay.size() || !text::is_alnum(hay[end]);
    if (left_ok && right_ok) return std::pair{pos, end};
  }
  return std::nullopt;
}

std::vector<MedicalConcept> extract_keywords(std::string_view sentence, KbClient& kb) {
  if (text::trim(sentence).empty()) throw InvalidArgument("extract_keywords: empty sentence");
  const Json answer = kb.ask_json("extract_keywords", {{"sentence", std::string(sentence)}},
                                  [](const Json& j) { return j.is_array(); });
  std::vector<MedicalConcept> concepts;
  for (const auto& item : answer) {
    if (!item.is_string()) continue;
    MedicalConcept c;
    c.surface = text::collapse_whitespace(text::nfc(item.get<std::string>()));
    c.canonical = text::canonical_term(c.surface);
    if (c.canonical.empty()) continue;
    const bool dup = std::any_of(concepts.begin(), concepts.end(),
                                 [&](const MedicalConcept& m) { return m.canonical == c.canonical; });
    if (dup) continue;
    c.span = find_span(sentence, c.surface);
    concepts.push_back(std::move(c));
  }
  return concepts;
}

MultilingualTranslations get_multilingual_translations(const MedicalConcept& mc,
                                                       const std::vector<std::string>& aux_langs,
                                                       KbClient& kb) {
  if (aux_langs.empty()) throw InvalidArgument("auxiliary language list is empty");
  const Json answer =
      kb.ask_json("multilingual", {{"concept", mc.canonical}, {"languages", join_langs(aux_langs)}},
                  [](const Json& j) { return j.is_object(); });
  MultilingualTranslations out;
  out.canonical = mc.canonical;
  for (const auto& lang : aux_langs) {
    const auto it = answer.find(lang);
    std::vector<std::string> terms = it == answer.end() ? std::vector<std::string>{} : string_list(*it);
    if (terms.empty()) {
      out.absent.push_back(lang);
    } else {
      out.per_language[lang] = terms.front();
    }
  }
  return out;
}

SynonymSet get_synonyms(const MedicalConcept& mc, const std::vector<std::string>& langs,
                        KbClient& kb) {
  if (langs.empty()) throw InvalidArgument("synonym language list is empty");
  const Json answer =
      kb.ask_json("synonyms", {{"concept", mc.canonical}, {"languages", join_langs(langs)}},
                  [](const Json& j) { return j.is_object(); });
  SynonymSet out;
  out.canonical = mc.canonical;
  for (const auto& lang : langs) {
    const auto it = answer.find(lang);
    std::vector<std::string> terms = it == answer.end() ? std::vector<std::string>{} : string_list(*it);
    if (terms.empty()) {
      out.absent.push_back(lang);
    } else {
      out.per_language[lang] = std::move(terms);
    }
  }
  return out;
}

Verdict parse_verdict(std::string_view answer) {
  const std::u32string s = text::to_u32(text::lowercase(answer));
  std::size_t i = 0;
  while (i < s.size() && !text::is_alnum(s[i])) ++i;
  std::size_t j = i;
  while (j < s.size() && text::is_alnum(s[j])) ++j;
  const std::string word = text::to_utf8(s.substr(i, j - i));
  if (word == "yes") return Verdict::kAccept;
  if (word == "no") return Verdict::kReject;
  return Verdict::kUnknown;
}

Verdict quality_check_translation(std::string_view source_term, std::string_view target_term,
                                  std::string_view source_lang, std::string_view target_lang,
                                  KbClient& checker) {
  if (text::trim(source_term).empty() || text::trim(target_term).empty()) {
    throw InvalidArgument("quality check needs both terms");
  }
  return parse_verdict(checker.ask("quality_check", {{"source_term", std::string(source_term)},
                                                     {"target_term", std::string(target_term)},
                                                     {"source_lang", std::string(source_lang)},
                                                     {"target_lang", std::string(target_lang)}}));
}

// ---------------------------------------------------------------------------
// UMLS snapshot

UmlsSnapshot::UmlsSnapshot(std::vector<UmlsRow> rows) : rows_(std::move(rows)) { build_index(); }

void UmlsSnapshot::build_index() {
  exact_.clear();
  loose_.clear();
  by_cui_.clear();
  max_term_words_ = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    exact_[{r.lang, text::canonical_term(r.term)}].push_back(i);
    loose_[{r.lang, text::loose_term(r.term)}].push_back(i);
    if (!r.cui.empty()) by_cui_[{r.cui, r.lang}].push_back(i);
    max_term_words_ = std::max(max_term_words_, metrics::word_tokens(r.term).size());
  }
  indexed_ = true;
}

UmlsSnapshot UmlsSnapshot::parse(std::string_view tsv, std::string_view origin) {
  std::istringstream in{std::string(tsv)};
  std::string line;
  std::size_t line_no = 0;
  auto split_tabs = [](const std::string& l) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = l.find('\t', start);
      cols.push_back(l.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    return cols;
  };
  int c_cui = -1, c_lang = -1, c_term = -1, c_pref = -1;
  std::size_t width = 0;
  std::vector<UmlsRow> rows;
  auto where = [&] { return std::string(origin) + ":" + std::to_string(line_no); };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto cols = split_tabs(line);
    if (width == 0) {
      width = cols.size();
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const std::string name = text::lowercase(text::trim(cols[k]));
        if (name == "cui") c_cui = static_cast<int>(k);
        if (name == "lang") c_lang = static_cast<int>(k);
        if (name == "term") c_term = static_cast<int>(k);
        if (name == "preferred") c_pref = static_cast<int>(k);
      }
      if (c_cui < 0 || c_lang < 0 || c_term < 0) {
        throw SchemaError(where() + ": header must name the columns cui, lang and term");
      }
      continue;
    }
    if (cols.size() != width) {
      throw SchemaError(where() + ": expected " + std::to_string(width) + " columns, found " +
                        std::to_string(cols.size()));
    }
    UmlsRow r;
    r.cui = text::trim(cols[c_cui]);
    r.lang = text::lowercase(text::trim(cols[c_lang]));
    r.term = text::collapse_whitespace(text::nfc(cols[c_term]));
    if (c_pref >= 0) {
      const std::string p = text::lowercase(text::trim(cols[c_pref]));
      r.preferred = p == "1" || p == "y" || p == "yes" || p == "true";
    }
    if (r.lang.empty() || r.term.empty()) throw SchemaError(where() + ": empty lang or term");
    rows.push_back(std::move(r));
  }
  return UmlsSnapshot(std::move(rows));
}

UmlsSnapshot UmlsSnapshot::load(const fs::path& path) {
  return parse(jsonl::read_file(path), path.string());
}

std::vector<std::size_t> UmlsSnapshot::match(std::string_view canonical, std::string_view lang) const {
  const auto exact = exact_.find({std::string(lang), text::canonical_term(canonical)});
  if (exact != exact_.end()) return exact->second;
  const auto loose = loose_.find({std::string(lang), text::loose_term(canonical)});
  if (loose != loose_.end()) return loose->second;
  return {};
}

std::vector<std::size_t> UmlsSnapshot::rows_for(const std::string& cui, std::string_view lang) const {
  const auto it = by_cui_.find({cui, std::string(lang)});
  return it == by_cui_.end() ? std::vector<std::size_t>{} : it->second;
}

std::vector<std::string> UmlsSnapshot::find_terms(std::string_view sentence, std::string_view lang) const {
  const auto tokens = metrics::word_tokens(sentence);
  std::vector<std::string> found;
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < tokens.size();) {
    std::size_t matched = 0;
    for (std::size_t len = std::min(max_term_words_, tokens.size() - i); len > 0; --len) {
      std::vector<std::string> words(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                     tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      const std::string surface = text::join(words, " ");
      if (exact_.count({std::string(lang), text::canonical_term(surface)})) {
        if (std::find(seen.begin(), seen.end(), text::canonical_term(surface)) == seen.end()) {
          seen.push_back(text::canonical_term(surface));
          found.push_back(surface);
        }
        matched = len;
        break;
      }
    }
    i += matched ? matched : 1;
  }
  return found;
}

std::vector<UmlsDictEntry> umls_lookup(const MedicalConcept& mc, const UmlsSnapshot& snapshot,
                                       std::string_view source_lang, std::string_view target_lang) {
  if (!snapshot.indexed()) throw ConfigError("UMLS snapshot is not loaded");
  std::vector<UmlsDictEntry> out;
  std::vector<std::string> seen_cuis;
  for (const std::size_t src_idx : snapshot.match(mc.canonical, source_lang)) {
    const auto& src = snapshot.rows()[src_idx];
    if (src.cui.empty()) continue;
    if (std::find(seen_cuis.begin(), seen_cuis.end(), src.cui) != seen_cuis.end()) continue;
    seen_cuis.push_back(src.cui);
    for (const std::size_t tgt_idx : snapshot.rows_for(src.cui, target_lang)) {
      const auto& tgt = snapshot.rows()[tgt_idx];
      const bool dup = std::any_of(out.begin(), out.end(), [&](const UmlsDictEntry& e) {
        return text::canonical_term(e.target_term) == text::canonical_term(tgt.term);
      });
      if (dup) continue;
      out.push_back({mc.canonical, src.cui, src.term, tgt.term, std::string(source_lang),
                     std::string(target_lang), std::nullopt});
    }
  }
  return out;
}

std::vector<UmlsDictEntry> umls_auxiliary_entries(const MedicalConcept& mc, const UmlsSnapshot& snapshot,
                                                  std::string_view source_lang, std::string_view aux1,
                                                  std::string_view aux2) {
  if (!snapshot.indexed()) throw ConfigError("UMLS snapshot is not loaded");
  auto preferred = [&](const std::string& cui, std::string_view lang) -> const UmlsRow* {
    const auto rows = snapshot.rows_for(cui, lang);
    if (rows.empty()) return nullptr;
    for (const std::size_t i : rows) {
      if (snapshot.rows()[i].preferred) return &snapshot.rows()[i];
    }
    return &snapshot.rows()[rows.front()];
  };
  std::vector<UmlsDictEntry> out;
  std::vector<std::string> seen;
  for (const std::size_t src_idx : snapshot.match(mc.canonical, source_lang)) {
    const std::string& cui = snapshot.rows()[src_idx].cui;
    if (cui.empty() || std::find(seen.begin(), seen.end(), cui) != seen.end()) continue;
    seen.push_back(cui);
    const UmlsRow* a = preferred(cui, aux1);
    const UmlsRow* b = preferred(cui, aux2);
    if (a && b) {
      out.push_back({mc.canonical, cui, a->term, b->term, std::string(aux1), std::string(aux2), std::nullopt});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enrichment

void EnrichmentConfig::validate() const {
  for (const auto& l : aux_langs) {
    if (!languages::is_primary_subtag(l)) throw ConfigError("invalid auxiliary language code '" + l + "'");
  }
  for (const auto& l : synonym_langs) {
    if (!languages::is_primary_subtag(l)) throw ConfigError("invalid synonym language code '" + l + "'");
  }
}

std::vector<std::string> EnrichmentConfig::effective_synonym_langs(std::string_view target_lang) const {
  if (!synonym_langs.empty()) return synonym_langs;
  std::vector<std::string> out{std::string(target_lang)};
  for (const auto& l : aux_langs) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

std::string utc_now_iso8601() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

EnrichmentOutcome enrich_sentence(const corpus::SentencePair& pair, const EnrichmentConfig& config,
                                  KbClient* kb, const UmlsSnapshot* snapshot) {
  config.validate();
  if (config.use_kb && kb == nullptr) throw ConfigError("enrichment needs a knowledge-base client");
  EnrichmentOutcome outcome;
  auto& e = outcome.enrichment;
  e.pair_id = pair.pair_id;
  e.kb_model = config.use_kb ? kb->options().kb_model : std::string();
  e.created_at = config.clock ? config.clock() : utc_now_iso8601();
  const std::string source_lang = kb ? kb->options().source_lang : "en";
  const std::string target_lang = kb ? kb->options().target_lang : "es";

  auto start = Clock::now();
  if (config.use_kb) {
    e.concepts = extract_keywords(pair.source, *kb);
  } else if (snapshot) {
    for (const auto& surface : snapshot->find_terms(pair.source, source_lang)) {
      e.concepts.push_back({surface, text::canonical_term(surface), find_span(pair.source, surface)});
    }
  }
  outcome.timings.keyword_extraction_s = seconds_since(start);

  start = Clock::now();
  for (const auto& mc : e.concepts) {
    for_concept(mc.canonical, [&] {
      if (config.use_kb) {
        if (!config.aux_langs.empty()) {
          e.multilingual.push_back(get_multilingual_translations(mc, config.aux_langs, *kb));
        }
        e.synonyms.push_back(get_synonyms(mc, config.effective_synonym_langs(target_lang), *kb));
      }
      if (snapshot) {
        for (auto& entry : umls_lookup(mc, *snapshot, source_lang, target_lang)) {
          e.umls.push_back(std::move(entry));
        }
        if (config.aux_langs.size() >= 2) {
          for (auto& entry : umls_auxiliary_entries(mc, *snapshot, source_lang, config.aux_langs[0],
                                                    config.aux_langs[1])) {
            e.umls.push_back(std::move(entry));
          }
        }
      }
    });
  }
  outcome.timings.keyword_translation_s =
      e.concepts.empty() ? 0.0 : seconds_since(start) / static_cast<double>(e.concepts.size());

  start = Clock::now();
  if (config.quality_check && kb) {
    for (auto& m : e.multilingual) {
      for_concept(m.canonical, [&] {
        for (const auto& [lang, term] : m.per_language) {
          m.verdicts[lang] = quality_check_translation(m.canonical, term, source_lang, lang, *kb);
        }
      });
    }
    for (auto& u : e.umls) {
      for_concept(u.canonical, [&] {
        u.verdict = quality_check_translation(u.source_term, u.target_term, u.source_lang,
                                              u.target_lang, *kb);
      });
    }
  }
  outcome.timings.quality_check_s = seconds_since(start);
  return outcome;
}

std::vector<EnrichmentOutcome> enrich_all(const std::vector<corpus::SentencePair>& pairs,
                                          const EnrichmentConfig& config, KbClient* kb,
                                          const UmlsSnapshot* snapshot, unsigned jobs) {
  std::vector<EnrichmentOutcome> out(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      try {
        out[i] = enrich_sentence(pairs[i], config, kb, snapshot);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, pairs.size()))));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr int kEnrichmentSchemaVersion = 1;

Json lang_list(const std::vector<std::string>& v) { return Json(v); }

}  // namespace

Json to_json(const ConceptEnrichment& e) {
  Json j = {{"v", kEnrichmentSchemaVersion},
            {"pair_id", e.pair_id},
            {"kb_model", e.kb_model},
            {"created_at", e.created_at}};
  j["concepts"] = Json::array();
  for (const auto& c : e.concepts) {
    Json cj = {{"surface", c.surface}, {"canonical", c.canonical}, {"span", nullptr}};
    if (c.span) cj["span"] = {c.span->first, c.span->second};
    j["concepts"].push_back(std::move(cj));
  }
  j["multilingual"] = Json::array();
  for (const auto& m : e.multilingual) {
    Json verdicts = Json::object();
    for (const auto& [lang, v] : m.verdicts) verdicts[lang] = to_string(v);
    j["multilingual"].push_back({{"concept", m.canonical},
                                 {"per_language", m.per_language},
                                 {"absent", lang_list(m.absent)},
                                 {"verdicts", verdicts}});
  }
  j["synonyms"] = Json::array();
  for (const auto& s : e.synonyms) {
    j["synonyms"].push_back(
        {{"concept", s.canonical}, {"per_language", s.per_language}, {"absent", lang_list(s.absent)}});
  }
  j["umls"] = Json::array();
  for (const auto& u : e.umls) {
    Json uj = {{"concept", u.canonical},         {"source_term", u.source_term},
               {"target_term", u.target_term}, {"source_lang", u.source_lang},
               {"target_lang", u.target_lang}, {"cui", nullptr},
               {"verdict", nullptr}};
    if (u.cui) uj["cui"] = *u.cui;
    if (u.verdict) uj["verdict"] = to_string(*u.verdict);
    j["umls"].push_back(std::move(uj));
  }
  return j;
}

ConceptEnrichment enrichment_from_json(const Json& j) {
  ConceptEnrichment e;
  try {
    e.pair_id = j.at("pair_id").get<std::string>();
    e.kb_model = j.value("kb_model", "");
    e.created_at = j.value("created_at", "");
    for (const auto& cj : j.at("concepts")) {
      MedicalConcept c{cj.at("surface").get<std::string>(), cj.at("canonical").get<std::string>(), std::nullopt};
      if (cj.contains("span") && !cj.at("span").is_null()) {
        c.span = std::pair{cj.at("span").at(0).get<std::size_t>(), cj.at("span").at(1).get<std::size_t>()};
      }
      e.concepts.push_back(std::move(c));
    }
    for (const auto& mj : j.value("multilingual", Json::array())) {
      MultilingualTranslations m;
      m.canonical = mj.at("concept").get<std::string>();
      m.per_language = mj.at("per_language").get<std::map<std::string, std::string>>();
      m.absent = mj.value("absent", std::vector<std::string>{});
      const Json verdicts = mj.value("verdicts", Json::object());
      for (const auto& [lang, v] : verdicts.items()) {
        m.verdicts[lang] = verdict_from_string(v.get<std::string>());
      }
      e.multilingual.push_back(std::move(m));
    }
    for (const auto& sj : j.value("synonyms", Json::array())) {
      SynonymSet s;
      s.canonical = sj.at("concept").get<std::string>();
      s.per_language = sj.at("per_language").get<std::map<std::string, std::vector<std::string>>>();
      s.absent = sj.value("absent", std::vector<std::string>{});
      e.synonyms.push_back(std::move(s));
    }
    for (const auto& uj : j.value("umls", Json::array())) {
      UmlsDictEntry u;
      u.canonical = uj.at("concept").get<std::string>();
      u.source_term = uj.at("source_term").get<std::string>();
      u.target_term = uj.at("target_term").get<std::string>();
      u.source_lang = uj.at("source_lang").get<std::string>();
      u.target_lang = uj.at("target_lang").get<std::string>();
      if (uj.contains("cui") && !uj.at("cui").is_null()) u.cui = uj.at("cui").get<std::string>();
      if (uj.contains("verdict") && !uj.at("verdict").is_null()) {
        u.verdict = verdict_from_string(uj.at("verdict").get<std::string>());
      }
      e.umls.push_back(std::move(u));
    }
  } catch (const Json::exception& ex) {
    throw SchemaError(std::string("invalid enrichment record: ") + ex.what());
  }
  if (!e.is_consistent()) {
    throw SchemaError("enrichment for '" + e.pair_id + "' references a concept it does not list");
  }
  return e;
}

void export_enrichments(const std::vector<EnrichmentOutcome>& outcomes, const fs::path& path) {
  std::string out;
  for (const auto& o : outcomes) {
    Json j = to_json(o.enrichment);
    j["timings"] = {{"keyword_extraction_s", o.timings.keyword_extraction_s},
                    {"keyword_translation_s", o.timings.keyword_translation_s},
                    {"quality_check_s", o.timings.quality_check_s}};
    out += jsonl::dump_line(j);
    out += '\n';
  }
  jsonl::write_file_atomic(path, out);
}

std::vector<EnrichmentOutcome> load_enrichments(const fs::path& path) {
  std::vector<EnrichmentOutcome> out;
  jsonl::for_each(path, [&](const Json& j, std::size_t line) {
    EnrichmentOutcome o;
    try {
      o.enrichment = enrichment_from_json(j);
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
    if (j.contains("timings")) {
      const auto& t = j.at("timings");
      o.timings.keyword_extraction_s = t.value("keyword_extraction_s", 0.0);
      o.timings.keyword_translation_s = t.value("keyword_translation_s", 0.0);
      o.timings.quality_check_s = t.value("quality_check_s", 0.0);
    }
    out.push_back(std::move(o));
  });
  return out;
}

}  // namespace medxlate::knowledge
