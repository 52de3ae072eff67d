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

#include "medxlate/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "medxlate/error.hpp"
#include "medxlate/languages.hpp"
#include "medxlate/resources.hpp"
#include "medxlate/text.hpp"

namespace medxlate::prompts {

using knowledge::ConceptEnrichment;
using knowledge::MedicalConcept;
using knowledge::Verdict;

std::string_view to_string(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::kDirect:
      return "direct";
    case PromptStrategy::kLlmKbMultilingual:
      return "llm-kb-multilingual";
    case PromptStrategy::kLlmKbSynonyms:
      return "llm-kb-synonyms";
    case PromptStrategy::kUmlsDict:
      return "umls-dict";
  }
  return "direct";
}

PromptStrategy strategy_from_string(std::string_view name) {
  for (const auto s : kAllStrategies) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown prompt strategy '" + std::string(name) +
                    "' (expected direct, llm-kb-multilingual, llm-kb-synonyms or umls-dict)");
}

std::vector<PromptStrategy> parse_strategy_list(std::string_view list) {
  if (text::trim(list) == "all") return {kAllStrategies.begin(), kAllStrategies.end()};
  std::vector<PromptStrategy> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = list.find(',', start);
    const std::string name = text::trim(list.substr(start, comma == std::string_view::npos ? list.npos : comma - start));
    if (!name.empty()) {
      const auto s = strategy_from_string(name);
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("empty strategy list");
  std::sort(out.begin(), out.end());
  return out;
}

bool is_structured(PromptStrategy strategy) { return strategy != PromptStrategy::kDirect; }

namespace {

std::string load_template(const RenderOptions& options, const std::string& name) {
  const std::string key = "templates/" + options.template_version + "/" + name;
  if (!options.template_dir.empty()) {
    const auto path = options.template_dir / options.template_version / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing template " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  }
  const auto text = resources::lookup(key);
  if (!text) throw ConfigError("unknown template '" + key + "'");
  return std::string(*text);
}

std::string label(const std::string& code, const RenderOptions& options) {
  const auto it = options.display_names.find(code);
  if (it != options.display_names.end()) return it->second;
  return options.language_names ? languages::english_name(code) : code;
}

std::string display_name(const std::string& code, const RenderOptions& options) {
  const auto it = options.display_names.find(code);
  return it != options.display_names.end() ? it->second : languages::english_name(code);
}

// Concepts in first-occurrence sentence order; concepts without a span keep
// their extraction order after the located ones.
std::vector<const MedicalConcept*> sentence_order(const ConceptEnrichment& e) {
  std::vector<const MedicalConcept*> order;
  for (const auto& c : e.concepts) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(), [](const MedicalConcept* a, const MedicalConcept* b) {
    if (a->span.has_value() != b->span.has_value()) return a->span.has_value();
    return a->span && b->span && a->span->first < b->span->first;
  });
  return order;
}

std::vector<std::string> synonym_order(const RenderOptions& options) {
  if (!options.synonym_langs.empty()) return options.synonym_langs;
  std::vector<std::string> out{options.target_lang};
  for (const auto& l : options.aux_langs) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

std::string header_for(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::kLlmKbMultilingual:
      return "llm-kb-multilingual.header.txt";
    case PromptStrategy::kLlmKbSynonyms:
      return "llm-kb-synonyms.header.txt";
    case PromptStrategy::kUmlsDict:
      return "umls-dict.header.txt";
    case PromptStrategy::kDirect:
      break;
  }
  return {};
}

}  // namespace

std::vector<std::string> context_lines(PromptStrategy strategy, const ConceptEnrichment& e,
                                       const RenderOptions& options) {
  std::vector<std::string> lines;
  for (const MedicalConcept* c : sentence_order(e)) {
    switch (strategy) {
      case PromptStrategy::kDirect:
        return {};
      case PromptStrategy::kLlmKbMultilingual: {
        for (const auto& m : e.multilingual) {
          if (m.canonical != c->canonical) continue;
          std::vector<std::string> parts;
          for (const auto& lang : options.aux_langs) {
            const auto term = m.per_language.find(lang);
            if (term == m.per_language.end()) continue;
            const auto verdict = m.verdicts.find(lang);
            if (verdict != m.verdicts.end() && verdict->second == Verdict::kReject) continue;
            parts.push_back(label(lang, options) + ": " + term->second);
          }
          if (!parts.empty()) lines.push_back(c->canonical + ": " + text::join(parts, ", ") + ".");
        }
        break;
      }
      case PromptStrategy::kLlmKbSynonyms: {
        for (const auto& s : e.synonyms) {
          if (s.canonical != c->canonical) continue;
          std::vector<std::string> order = synonym_order(options);
          for (const auto& [lang, terms] : s.per_language) {
            if (std::find(order.begin(), order.end(), lang) == order.end()) order.push_back(lang);
          }
          std::vector<std::string> parts;
          for (const auto& lang : order) {
            const auto it = s.per_language.find(lang);
            if (it == s.per_language.end() || it->second.empty()) continue;
            parts.push_back(label(lang, options) + ": [" + text::join(it->second, ", ") + "]");
          }
          if (!parts.empty()) {
            lines.push_back("Synonyms of " + c->canonical + " in different languages: " +
                            text::join(parts, "; ") + ".");
          }
        }
        break;
      }
      case PromptStrategy::kUmlsDict: {
        for (const auto& u : e.umls) {
          if (u.canonical != c->canonical) continue;
          if (u.verdict == Verdict::kReject) continue;
          lines.push_back(u.source_term + " means " + u.target_term + ".");
        }
        break;
      }
    }
  }
  return lines;
}

RenderedPrompt render_prompt(PromptStrategy strategy, const corpus::SentencePair& pair,
                             const ConceptEnrichment* enrichment, const RenderOptions& options) {
  RenderedPrompt out;
  out.strategy = strategy;
  out.pair_id = pair.pair_id;
  out.sentence = pair.source;
  out.template_version = options.template_version;

  if (is_structured(strategy)) {
    if (enrichment == nullptr) {
      throw InvalidArgument("pair '" + pair.pair_id + "': strategy " + std::string(to_string(strategy)) +
                            " needs an enrichment");
    }
    if (enrichment->pair_id != pair.pair_id) {
      throw InvalidArgument("enrichment for '" + enrichment->pair_id + "' does not belong to pair '" +
                            pair.pair_id + "'");
    }
    const auto lines = context_lines(strategy, *enrichment, options);
    if (lines.empty()) {
      out.degraded = true;
    } else {
      out.context_block = load_template(options, header_for(strategy)) + "\n" + text::join(lines, "\n");
    }
  }

  const std::string scaffold = load_template(options, "scaffold.txt");
  const std::string source_name = display_name(options.source_lang, options);
  const std::string context_section = out.context_block.empty() ? "" : out.context_block + "\n\n";
  // Placeholders are unique in the scaffold, so slot offsets come from the
  // prefix rendered up to each placeholder.
  auto prefix_len = [&](std::string_view placeholder) {
    const auto pos = scaffold.find(placeholder);
    if (pos == std::string::npos) {
      throw ConfigError("scaffold template lacks " + std::string(placeholder));
    }
    return pos;
  };
  const std::map<std::string, std::string> vars = {
      {"source_name", source_name},
      {"target_name", display_name(options.target_lang, options)},
      {"source_lang", options.source_lang},
      {"target_lang", options.target_lang},
      {"context_section", context_section},
      {"sentence", pair.source}};
  out.text = text::substitute(scaffold, vars);
  out.context_offset = text::substitute(scaffold.substr(0, prefix_len("{context_section}")), vars).size();
  out.sentence_offset = text::substitute(scaffold.substr(0, prefix_len("{sentence}")), vars).size();
  return out;
}

}  // namespace medxlate::prompts
