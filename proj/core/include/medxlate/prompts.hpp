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

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "medxlate/corpus.hpp"
#include "medxlate/knowledge.hpp"

namespace medxlate::prompts {

enum class PromptStrategy { kDirect, kLlmKbMultilingual, kLlmKbSynonyms, kUmlsDict };

inline constexpr std::array<PromptStrategy, 4> kAllStrategies = {
    PromptStrategy::kDirect, PromptStrategy::kLlmKbMultilingual, PromptStrategy::kLlmKbSynonyms,
    PromptStrategy::kUmlsDict};

std::string_view to_string(PromptStrategy strategy);
PromptStrategy strategy_from_string(std::string_view name);  // throws ConfigError
// "all" or a comma-separated list of strategy names.
std::vector<PromptStrategy> parse_strategy_list(std::string_view list);
bool is_structured(PromptStrategy strategy);

struct RenderOptions {
  std::string source_lang = "en";
  std::string target_lang = "es";
  std::vector<std::string> aux_langs = {"fr", "pt"};
  // Language order for synonym lines; empty means target then auxiliary.
  std::vector<std::string> synonym_langs;
  // Label context languages with English names instead of ISO codes.
  bool language_names = false;
  // Overrides for display names, keyed by ISO code.
  std::map<std::string, std::string> display_names;
  std::string template_version = "v1";
  // Reads templates from `<template_dir>/<version>/` instead of the
  // compiled-in copies when set.
  std::filesystem::path template_dir;
};

struct RenderedPrompt {
  PromptStrategy strategy = PromptStrategy::kDirect;
  std::string pair_id;
  std::string sentence;
  std::string text;
  std::string context_block;
  std::string template_version;
  // A structured strategy had no usable context and fell back to the direct
  // form.
  bool degraded = false;

  std::size_t sentence_offset = 0;  // start of the sentence slot in `text`
  std::size_t context_offset = 0;   // start of `context_block` in `text`
};

// Context lines for one strategy, without the header. Concepts follow
// sentence order; rejected terms and concepts without data are omitted.
std::vector<std::string> context_lines(PromptStrategy strategy,
                                       const knowledge::ConceptEnrichment& enrichment,
                                       const RenderOptions& options);

RenderedPrompt render_prompt(PromptStrategy strategy, const corpus::SentencePair& pair,
                             const knowledge::ConceptEnrichment* enrichment,
                             const RenderOptions& options = {});

}  // namespace medxlate::prompts
