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

#include "medxlate/stub.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <random>

#include "medxlate/digest.hpp"
#include "medxlate/error.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/metrics.hpp"
#include "medxlate/text.hpp"

namespace medxlate::stub {

using Json = nlohmann::json;

namespace {

std::uint64_t digest_u64(std::string_view data) {
  return std::stoull(sha256_hex(data).substr(0, 16), nullptr, 16);
}

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool is_all_punct(std::string_view token) {
  const auto cps = text::to_u32(token);
  return !cps.empty() && std::all_of(cps.begin(), cps.end(), text::is_punct);
}

bool attaches_left(std::string_view token) {
  return token == "," || token == "." || token == ";" || token == ":" || token == "!" ||
         token == "?" || token == ")" || token == "]" || token == "»" || token == "%";
}

bool attaches_right(std::string_view token) {
  return token == "(" || token == "[" || token == "¿" || token == "¡" || token == "«";
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  bool glue = true;
  for (const auto& t : tokens) {
    if (!glue && !attaches_left(t)) out.push_back(' ');
    out += t;
    glue = attaches_right(t);
  }
  return out;
}

std::vector<std::string> split_languages(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const auto piece = text::trim(list.substr(start, comma == std::string_view::npos ? list.npos : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string field(const chat::Request& r, const std::string& key) {
  const auto it = r.fields.find(key);
  return it == r.fields.end() ? std::string() : it->second;
}

// The term after "<concept> means " in a dictionary context, if any.
std::optional<std::string> dictionary_term(std::string_view context, std::string_view key) {
  const std::string needle = std::string(key) + " means ";
  const std::string lower = text::lowercase(context);
  std::size_t pos = 0;
  while ((pos = lower.find(needle, pos)) != std::string::npos) {
    if (pos == 0 || lower[pos - 1] == '\n') {
      const std::size_t begin = pos + needle.size();
      std::size_t end = context.find('\n', begin);
      if (end == std::string_view::npos) end = context.size();
      std::string term(context.substr(begin, end - begin));
      if (!term.empty() && term.back() == '.') term.pop_back();
      if (!term.empty()) return term;
    }
    pos += needle.size();
  }
  return std::nullopt;
}

}  // namespace

Lexicon Lexicon::from_json(const Json& j) {
  Lexicon lex;
  try {
    lex.source_lang = j.value("source_lang", lex.source_lang);
    lex.target_lang = j.value("target_lang", lex.target_lang);
    if (j.contains("general")) {
      for (const auto& [k, v] : j.at("general").items()) lex.general[text::canonical_term(k)] = v.get<std::string>();
    }
    if (j.contains("concepts")) {
      for (const auto& [key, langs] : j.at("concepts").items()) {
        auto& entry = lex.concepts[text::canonical_term(key)];
        for (const auto& [lang, terms] : langs.items()) {
          if (terms.is_string()) {
            entry[lang].push_back(terms.get<std::string>());
          } else {
            for (const auto& t : terms) entry[lang].push_back(t.get<std::string>());
          }
        }
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid stub lexicon: ") + e.what());
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  const std::string content = jsonl::read_file(path);
  try {
    return from_json(Json::parse(content));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

const std::vector<std::string>* Lexicon::terms(std::string_view key, std::string_view lang) const {
  const auto it = concepts.find(std::string(key));
  if (it == concepts.end()) return nullptr;
  const auto lt = it->second.find(std::string(lang));
  return lt == it->second.end() || lt->second.empty() ? nullptr : &lt->second;
}

namespace {

constexpr std::size_t kMaxConceptWords = 5;

// Length in tokens of the longest concept starting at `i`, 0 when none.
std::size_t match_at(const Lexicon& lex, const std::vector<std::string>& lowered, std::size_t i,
                     std::string* key) {
  for (std::size_t len = std::min(kMaxConceptWords, lowered.size() - i); len > 0; --len) {
    std::vector<std::string> words(lowered.begin() + static_cast<std::ptrdiff_t>(i),
                                   lowered.begin() + static_cast<std::ptrdiff_t>(i + len));
    std::string candidate = text::join(words, " ");
    if (lex.concepts.count(candidate)) {
      if (key) *key = std::move(candidate);
      return len;
    }
  }
  return 0;
}

}  // namespace

std::vector<std::string> Lexicon::find_concepts(std::string_view sentence) const {
  const auto tokens = metrics::word_tokens(sentence);
  std::vector<std::string> lowered;
  for (const auto& t : tokens) lowered.push_back(text::canonical_term(t));
  std::vector<std::string> found;
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < tokens.size();) {
    std::string key;
    const std::size_t len = match_at(*this, lowered, i, &key);
    if (len == 0) {
      ++i;
      continue;
    }
    if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
      seen.push_back(key);
      std::vector<std::string> surface(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      found.push_back(text::join(surface, " "));
    }
    i += len;
  }
  return found;
}

LexiconBackend::LexiconBackend(std::shared_ptr<const Lexicon> lexicon, std::string model_name,
                               StubBehavior behavior)
    : lexicon_(std::move(lexicon)), model_name_(std::move(model_name)), behavior_(behavior) {
  if (!lexicon_) throw ConfigError("stub backend needs a lexicon");
}

bool LexiconBackend::knows(std::string_view key) const {
  const std::uint64_t h = digest_u64(model_name_ + '\x1f' + std::string(key));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < behavior_.recall;
}

std::string LexiconBackend::translate(std::string_view sentence, std::string_view context,
                                      double temperature) const {
  const auto tokens = metrics::word_tokens(sentence);
  std::vector<std::string> lowered;
  for (const auto& t : tokens) lowered.push_back(text::canonical_term(t));
  const std::string lower_context = text::lowercase(context);
  const std::string& tgt = lexicon_->target_lang;

  std::vector<std::string> out;
  auto word_by_word = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto it = lexicon_->general.find(lowered[k]);
      out.push_back(it != lexicon_->general.end() ? it->second : tokens[k]);
    }
  };
  for (std::size_t i = 0; i < tokens.size();) {
    std::string key;
    const std::size_t len = match_at(*lexicon_, lowered, i, &key);
    if (len == 0) {
      word_by_word(i, i + 1);
      ++i;
      continue;
    }
    const auto* terms = lexicon_->terms(key, tgt);
    std::optional<std::string> chosen = dictionary_term(context, key);
    if (!chosen && terms && (knows(key) || lower_context.find(key) != std::string::npos)) {
      chosen = terms->front();
    }
    if (chosen) {
      for (auto& w : text::split_whitespace(*chosen)) out.push_back(std::move(w));
    } else {
      word_by_word(i, i + len);
    }
    i += len;
  }

  char temp[32];
  std::snprintf(temp, sizeof(temp), "%.4f", temperature);
  std::mt19937_64 rng(digest_u64(model_name_ + '\x1f' + std::string(sentence) + '\x1f' +
                                 std::string(context) + '\x1f' + temp));
  const double p = std::clamp(behavior_.noise * temperature, 0.0, 1.0);
  for (std::size_t k = 0; k + 1 < out.size(); ++k) {
    if (is_all_punct(out[k]) || is_all_punct(out[k + 1])) continue;
    if (unit_interval(rng) < p) {
      std::swap(out[k], out[k + 1]);
      ++k;
    }
  }
  std::string result = detokenize(out);
  if (!tokens.empty()) {
    const auto first = text::to_u32(tokens.front());
    if (!first.empty() && text::is_upper(first[0])) result = text::capitalize_first(result);
  }
  return result;
}

chat::Response LexiconBackend::answer_kb(const chat::Request& request) const {
  const std::string& task = request.task;
  if (task == "kb.extract_keywords") {
    return {Json(lexicon_->find_concepts(field(request, "sentence"))).dump()};
  }
  const std::string key = text::canonical_term(field(request, "concept"));
  if (task == "kb.multilingual" || task == "kb.synonyms") {
    Json answer = Json::object();
    for (const auto& lang : split_languages(field(request, "languages"))) {
      const auto* terms = lexicon_->terms(key, lang);
      if (!terms) continue;
      if (task == "kb.multilingual") {
        answer[lang] = terms->front();
      } else {
        answer[lang] = *terms;
      }
    }
    return {answer.dump()};
  }
  if (task == "kb.quality_check") {
    const std::string source = text::canonical_term(field(request, "source_term"));
    const std::string target = text::canonical_term(field(request, "target_term"));
    const std::string src_lang = field(request, "source_lang").empty() ? lexicon_->source_lang
                                                                        : field(request, "source_lang");
    const std::string tgt_lang = field(request, "target_lang").empty() ? lexicon_->target_lang
                                                                        : field(request, "target_lang");
    auto contains = [](const std::vector<std::string>* terms, const std::string& t) {
      if (!terms) return false;
      return std::any_of(terms->begin(), terms->end(),
                         [&](const std::string& x) { return text::canonical_term(x) == t; });
    };
    bool ok = false;
    for (const auto& [name, langs] : lexicon_->concepts) {
      const bool source_match = src_lang == lexicon_->source_lang ? name == source
                                                                  : contains(lexicon_->terms(name, src_lang), source);
      if (source_match && contains(lexicon_->terms(name, tgt_lang), target)) ok = true;
    }
    return {ok ? "yes" : "no"};
  }
  throw EndpointError(model_name_ + ": unsupported task '" + task + "'");
}

chat::Response LexiconBackend::complete(const chat::Request& request) {
  if (request.task.rfind("kb.", 0) == 0) return answer_kb(request);
  if (request.task == "translate") {
    return {translate(field(request, "sentence"), field(request, "context"), request.temperature)};
  }
  throw EndpointError(model_name_ + ": unsupported task '" + request.task + "'");
}

}  // namespace medxlate::stub
