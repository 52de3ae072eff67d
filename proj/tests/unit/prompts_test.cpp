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

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "medxlate/error.hpp"
#include "medxlate/prompts.hpp"
#include "support/generators.hpp"
#include "support/prompt_fixture.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace medxlate;
using namespace medxlate::prompts;
using knowledge::ConceptEnrichment;
using knowledge::Verdict;

const std::string kGoldenDir = std::string(MEDXLATE_TEST_DATA_DIR) + "/golden/v1/";

corpus::SentencePair fixture_pair() { return testing_support::golden_pair(); }
ConceptEnrichment fixture_enrichment() { return testing_support::golden_enrichment(); }

std::string golden(const std::string& name) { return testing_support::slurp(kGoldenDir + name); }

class Golden : public ::testing::TestWithParam<PromptStrategy> {};

TEST_P(Golden, MatchesCommittedFile) {
  const auto enrichment = fixture_enrichment();
  const auto prompt = render_prompt(GetParam(), fixture_pair(), &enrichment);
  const std::string expected = golden(std::string(to_string(GetParam())) + ".txt");
  ASSERT_FALSE(expected.empty());
  EXPECT_EQ(prompt.text, expected);
  EXPECT_FALSE(prompt.degraded);
  EXPECT_EQ(prompt.template_version, "v1");
}

INSTANTIATE_TEST_SUITE_P(AllStrategies, Golden, ::testing::ValuesIn(kAllStrategies),
                         [](const auto& info) {
                           std::string n(to_string(info.param));
                           std::replace(n.begin(), n.end(), '-', '_');
                           return n;
                         });

TEST(Render, LanguageNamesOption) {
  const auto enrichment = fixture_enrichment();
  RenderOptions options;
  options.language_names = true;
  EXPECT_EQ(render_prompt(PromptStrategy::kLlmKbMultilingual, fixture_pair(), &enrichment, options).text,
            golden("llm-kb-multilingual.names.txt"));
}

TEST(Render, UmlsSingleEntryLine) {
  ConceptEnrichment e;
  e.pair_id = "p";
  e.concepts = {{"fever", "fever", std::nullopt}};
  e.umls = {{"fever", "C0015967", "fever", "fiebre", "en", "es", std::nullopt}};
  corpus::SentencePair p;
  p.pair_id = "p";
  p.source = "I have a fever.";
  const auto prompt = render_prompt(PromptStrategy::kUmlsDict, p, &e);
  EXPECT_EQ(prompt.context_block, "Translation dictionary:\nfever means fiebre.");
}

TEST(Render, SynonymAndMultilingualLines) {
  ConceptEnrichment e;
  e.pair_id = "p";
  e.concepts = {{"fever", "fever", std::nullopt}};
  e.synonyms = {{"fever", {{"es", {"fiebre", "pirexia"}}}, {}}};
  e.multilingual = {{"fever", {{"fr", "fièvre"}, {"pt", "febre"}}, {}, {}}};
  EXPECT_EQ(context_lines(PromptStrategy::kLlmKbSynonyms, e, {}),
            std::vector<std::string>{"Synonyms of fever in different languages: es: [fiebre, pirexia]."});
  EXPECT_EQ(context_lines(PromptStrategy::kLlmKbMultilingual, e, {}),
            std::vector<std::string>{"fever: fr: fièvre, pt: febre."});
}

TEST(Render, DirectHasNoContext) {
  const auto enrichment = fixture_enrichment();
  EXPECT_EQ(render_prompt(PromptStrategy::kDirect, fixture_pair(), &enrichment).context_block, "");
  EXPECT_EQ(render_prompt(PromptStrategy::kDirect, fixture_pair(), nullptr).context_block, "");
}

TEST(Render, EmptyEnrichmentDegradesToDirect) {
  ConceptEnrichment empty;
  empty.pair_id = fixture_pair().pair_id;
  const auto direct = render_prompt(PromptStrategy::kDirect, fixture_pair(), nullptr);
  for (const auto s : kAllStrategies) {
    if (!is_structured(s)) continue;
    const auto prompt = render_prompt(s, fixture_pair(), &empty);
    EXPECT_TRUE(prompt.degraded);
    EXPECT_EQ(prompt.strategy, s);
    EXPECT_EQ(prompt.text, direct.text);
    EXPECT_EQ(prompt.context_block, "");
  }
}

TEST(Render, MismatchedEnrichmentRejected) {
  auto e = fixture_enrichment();
  e.pair_id = "other";
  EXPECT_THROW(render_prompt(PromptStrategy::kUmlsDict, fixture_pair(), &e), InvalidArgument);
  EXPECT_THROW(render_prompt(PromptStrategy::kUmlsDict, fixture_pair(), nullptr), InvalidArgument);
}

TEST(Render, StrategiesDifferOnlyInContext) {
  const auto enrichment = fixture_enrichment();
  const auto direct = render_prompt(PromptStrategy::kDirect, fixture_pair(), &enrichment);
  for (const auto s : kAllStrategies) {
    const auto p = render_prompt(s, fixture_pair(), &enrichment);
    EXPECT_EQ(p.text.substr(p.context_offset, p.context_block.size()), p.context_block);
    std::string stripped = p.text;
    if (!p.context_block.empty()) stripped.erase(p.context_offset, p.context_block.size() + 2);
    EXPECT_EQ(stripped, direct.text) << to_string(s);
    EXPECT_EQ(p.text.substr(p.sentence_offset), fixture_pair().source + "\n");
  }
}

TEST(Render, ConceptOrderFollowsSentence) {
  const auto enrichment = fixture_enrichment();
  const auto lines = context_lines(PromptStrategy::kUmlsDict, enrichment, {});
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.front(), "fever means fiebre.");
}

TEST(Render, TemplateDelimitersInDataAreInert) {
  std::mt19937_64 rng(99);
  const auto direct_template = render_prompt(PromptStrategy::kDirect, fixture_pair(), nullptr);
  const std::size_t prefix = direct_template.context_offset;
  for (int i = 0; i < 500; ++i) {
    corpus::SentencePair p = fixture_pair();
    p.source = testing_support::random_text(rng, 30) + " {sentence} {context_section}";
    ConceptEnrichment e;
    e.pair_id = p.pair_id;
    const std::string c = "{source_name}" + testing_support::random_text(rng, 12) + "{x}";
    e.concepts = {{c, c, std::nullopt}};
    const std::string t = testing_support::random_text(rng, 12) + "{target_name}";
    e.umls = {{c, std::nullopt, c, t, "en", "es", std::nullopt}};
    const auto prompt = render_prompt(PromptStrategy::kUmlsDict, p, &e);
    EXPECT_EQ(prompt.text.substr(0, prefix), direct_template.text.substr(0, prefix));
    EXPECT_EQ(prompt.context_block, "Translation dictionary:\n" + c + " means " + t + ".");
    EXPECT_EQ(prompt.text.substr(prompt.context_offset, prompt.context_block.size()), prompt.context_block);
    EXPECT_EQ(prompt.text.substr(prompt.sentence_offset), p.source + "\n");
    EXPECT_EQ(prompt.text.substr(prompt.sentence_offset - 18, 18), "English sentence: ");
  }
}

TEST(Render, TemplateDirectoryOverride) {
  testing_support::TempDir dir;
  dir.write("v9/scaffold.txt", "[{source_lang}->{target_lang}] {context_section}{sentence}");
  dir.write("v9/umls-dict.header.txt", "Dict:");
  RenderOptions options;
  options.template_dir = dir.path();
  options.template_version = "v9";
  const auto enrichment = fixture_enrichment();
  const auto p = render_prompt(PromptStrategy::kUmlsDict, fixture_pair(), &enrichment, options);
  EXPECT_EQ(p.text.substr(0, 20), "[en->es] Dict:\nfever");
  EXPECT_EQ(p.template_version, "v9");
  options.template_version = "v404";
  EXPECT_THROW(render_prompt(PromptStrategy::kDirect, fixture_pair(), nullptr, options), ConfigError);
}

TEST(Strategy, Names) {
  for (const auto s : kAllStrategies) EXPECT_EQ(strategy_from_string(to_string(s)), s);
  EXPECT_EQ(parse_strategy_list("all").size(), 4u);
  EXPECT_EQ(parse_strategy_list("umls-dict, direct"),
            (std::vector<PromptStrategy>{PromptStrategy::kDirect, PromptStrategy::kUmlsDict}));
  EXPECT_THROW(strategy_from_string("umls"), ConfigError);
  EXPECT_THROW(parse_strategy_list(""), ConfigError);
}

}  // namespace
