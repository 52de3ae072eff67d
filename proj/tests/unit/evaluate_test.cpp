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

#include <algorithm>

#include "medxlate/error.hpp"
#include "medxlate/evaluate.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace medxlate;
using namespace medxlate::metrics;
using prompts::PromptStrategy;
using translate::TranslationResult;

std::vector<corpus::SentencePair> corpus_pairs() {
  const std::vector<std::pair<std::string, std::string>> data = {
      {"Fever is common.", "La fiebre es común."},
      {"Drink water.", "Beba agua."},
      {"The cough lasts a week.", "La tos dura una semana."},
      {"Call your doctor.", "Llame a su médico."}};
  std::vector<corpus::SentencePair> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    corpus::SentencePair p;
    p.pair_id = "a-000" + std::to_string(i);
    p.article_id = "a";
    p.source = data[i].first;
    p.reference = data[i].second;
    p.split = corpus::Split::kTest;
    out.push_back(p);
  }
  return out;
}

TranslationResult result(const std::string& pair_id, PromptStrategy s, double t, const std::string& hyp) {
  TranslationResult r;
  r.pair_id = pair_id;
  r.strategy = s;
  r.temperature = t;
  r.hypothesis = hyp;
  r.model_name = "m";
  r.attempt_count = 1;
  return r;
}

std::vector<TranslationResult> identity_results() {
  std::vector<TranslationResult> out;
  for (const auto& p : corpus_pairs()) {
    for (const auto s : prompts::kAllStrategies) {
      for (const double t : {0.2, 0.3}) out.push_back(result(p.pair_id, s, t, p.reference));
    }
  }
  return out;
}

std::vector<ReportRow> corpus_rows(const std::vector<ReportRow>& rows, Metric metric) {
  std::vector<ReportRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [&](const auto& r) { return r.level == RowLevel::kCorpus && r.metric == metric; });
  return out;
}

TEST(ScoreRun, IdentityGivesMaxima) {
  const auto rows = score_run(identity_results(), corpus_pairs());
  const auto bleu = corpus_rows(rows, Metric::kBleu);
  const auto chrf = corpus_rows(rows, Metric::kChrfpp);
  const auto rouge = corpus_rows(rows, Metric::kRougeLSum);
  ASSERT_EQ(bleu.size(), 8u);
  ASSERT_EQ(chrf.size(), 8u);
  ASSERT_EQ(rouge.size(), 8u);
  for (const auto& r : bleu) {
    EXPECT_DOUBLE_EQ(r.value, 100.0);
    EXPECT_EQ(r.segments, 4u);
  }
  for (const auto& r : chrf) EXPECT_DOUBLE_EQ(r.value, 100.0);
  for (const auto& r : rouge) EXPECT_DOUBLE_EQ(r.value, 1.0);
  const auto segments = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.level == RowLevel::kSegment; });
  EXPECT_EQ(segments, 8 * 4 * 3);
}

TEST(ScoreRun, UnresolvedPairIdIsNamed) {
  auto results = identity_results();
  results.push_back(result("ghost-0001", PromptStrategy::kDirect, 0.2, "x"));
  try {
    score_run(results, corpus_pairs());
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("ghost-0001"), std::string::npos);
  }
}

TEST(ScoreRun, MixedCellsMatchDirectRecomputation) {
  const auto pairs = corpus_pairs();
  const std::vector<std::string> direct_hyps = {"La fiebre es frecuente.", "Beba agua.", "La tos dura semana.",
                                                "Llame médico."};
  const std::vector<std::string> umls_hyps = {"La fiebre es común.", "Bebe agua.", "Tos dura una semana.",
                                              "Llame a su médico."};
  std::vector<TranslationResult> results;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    results.push_back(result(pairs[i].pair_id, PromptStrategy::kDirect, 0.2, direct_hyps[i]));
    results.push_back(result(pairs[i].pair_id, PromptStrategy::kUmlsDict, 0.2, umls_hyps[i]));
  }
  const auto rows = score_run(results, pairs);
  for (const auto& [strategy, hyps] :
       {std::pair{PromptStrategy::kDirect, direct_hyps}, std::pair{PromptStrategy::kUmlsDict, umls_hyps}}) {
    std::vector<TokenizedSegment> h;
    std::vector<TokenizedSegment> r;
    std::vector<std::string> refs;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      h.push_back(tokenize(hyps[i], TokenMode::kWord));
      r.push_back(tokenize(pairs[i].reference, TokenMode::kWord));
      refs.push_back(pairs[i].reference);
    }
    const double bleu = bleu_corpus(h, r).value;
    const double chrf = chrf_pp_corpus(hyps, refs).value;
    double rouge = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) rouge += rouge_l_sum(h[i], r[i]).value / 4.0;
    for (const auto& row : rows) {
      if (row.level != RowLevel::kCorpus || row.strategy != strategy) continue;
      if (row.metric == Metric::kBleu) EXPECT_NEAR(row.value, bleu, 1e-12);
      if (row.metric == Metric::kChrfpp) EXPECT_NEAR(row.value, chrf, 1e-12);
      if (row.metric == Metric::kRougeLSum) EXPECT_NEAR(row.value, rouge, 1e-12);
    }
  }
  const auto bleu_rows = corpus_rows(rows, Metric::kBleu);
  ASSERT_EQ(bleu_rows.size(), 2u);
  EXPECT_LT(bleu_rows[0].value, bleu_rows[1].value);
}

TEST(ScoreRun, FailedResultsAreCountedNotScored) {
  auto results = identity_results();
  results[0].hypothesis.clear();
  results[0].error = "HTTP 500";
  const auto rows = score_run(results, corpus_pairs());
  const auto bleu = corpus_rows(rows, Metric::kBleu);
  const auto cell = std::find_if(bleu.begin(), bleu.end(), [&](const auto& r) {
    return r.strategy == results[0].strategy && r.temperature == results[0].temperature;
  });
  ASSERT_NE(cell, bleu.end());
  EXPECT_EQ(cell->failed_cells, 1u);
  EXPECT_EQ(cell->segments, 3u);
  EXPECT_DOUBLE_EQ(cell->value, 100.0);
}

TEST(ScoreRun, ExternalScoresAttachedWithHandle) {
  EvaluateOptions options;
  options.metrics = {Metric::kBleu, Metric::kExternal, Metric::kBertScore};
  const auto without = score_run(identity_results(), corpus_pairs(), options, nullptr);
  EXPECT_TRUE(corpus_rows(without, Metric::kExternal).empty());
  EXPECT_TRUE(corpus_rows(without, Metric::kBertScore).empty());

  ScorerOptions so;
  so.args = {"--match", "--value", "0.1"};
  auto handle = ScorerHandle::open(MEDXLATE_ECHO_SCORER, so);
  const auto with = score_run(identity_results(), corpus_pairs(), options, handle.get());
  const auto ext = corpus_rows(with, Metric::kExternal);
  ASSERT_EQ(ext.size(), 8u);
  for (const auto& r : ext) EXPECT_DOUBLE_EQ(r.value, 1.0);
  for (const auto& r : corpus_rows(with, Metric::kBertScore)) EXPECT_DOUBLE_EQ(r.value, 1.0);
}

TEST(ScoreRun, LowercaseOption) {
  std::vector<TranslationResult> results;
  for (const auto& p : corpus_pairs()) {
    std::string upper = p.reference;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    results.push_back(result(p.pair_id, PromptStrategy::kDirect, 0.2, upper));
  }
  EvaluateOptions options;
  options.metrics = {Metric::kBleu};
  const double cased = corpus_rows(score_run(results, corpus_pairs(), options), Metric::kBleu)[0].value;
  options.lowercase = true;
  const double lowered = corpus_rows(score_run(results, corpus_pairs(), options), Metric::kBleu)[0].value;
  EXPECT_LT(cased, lowered);
  EXPECT_DOUBLE_EQ(lowered, 100.0);
}

TEST(Report, RoundTripAndCsv) {
  const auto rows = score_run(identity_results(), corpus_pairs());
  testing_support::TempDir dir;
  export_report_jsonl(rows, dir / "report.jsonl");
  export_report_csv(rows, dir / "report.csv");
  EXPECT_EQ(load_report(dir / "report.jsonl"), rows);
  const std::string csv = testing_support::slurp(dir / "report.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "level,model,strategy,temperature,pair_id,metric,value,segments,failed_cells");
  EXPECT_NE(csv.find("corpus,m,direct,0.2,,bleu,100,4,0\n"), std::string::npos);
}

TEST(Report, ParseMetricList) {
  EXPECT_EQ(parse_metric_list("bleu,chrfpp,rouge"),
            (std::vector<Metric>{Metric::kBleu, Metric::kChrfpp, Metric::kRougeLSum}));
  EXPECT_EQ(parse_metric_list("comet,bleu,bleu"), (std::vector<Metric>{Metric::kExternal, Metric::kBleu}));
  EXPECT_THROW(parse_metric_list("ter"), ConfigError);
  EXPECT_THROW(parse_metric_list(""), ConfigError);
}

}  // namespace
