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
#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "../tests/support/synthetic_corpus.hpp"
#include "medxlate/corpus.hpp"
#include "medxlate/metrics.hpp"
#include "medxlate/stats.hpp"
#include "medxlate/stub.hpp"
#include "medxlate/translate.hpp"

namespace {

using namespace medxlate;

std::vector<std::string> sentences(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(testing_support::random_sentence_text(rng, 20));
  return out;
}

void BM_BleuCorpus(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto hyp_text = sentences(n, 1);
  const auto ref_text = sentences(n, 1);
  std::vector<metrics::TokenizedSegment> hyps, refs;
  for (std::size_t i = 0; i < n; ++i) {
    hyps.push_back(metrics::tokenize(hyp_text[i], metrics::TokenMode::kWord));
    refs.push_back(metrics::tokenize(ref_text[(i + 1) % n], metrics::TokenMode::kWord));
  }
  for (auto _ : state) benchmark::DoNotOptimize(metrics::bleu_corpus(hyps, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_BleuCorpus)->Arg(100)->Arg(1000);

void BM_ChrfPlusPlusCorpus(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto hyps = sentences(n, 2);
  const auto refs = sentences(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::chrf_pp_corpus(hyps, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ChrfPlusPlusCorpus)->Arg(100)->Arg(1000);

void BM_RougeLSum(benchmark::State& state) {
  const auto hyps = sentences(100, 4);
  const auto refs = sentences(100, 5);
  for (auto _ : state) {
    for (std::size_t i = 0; i < hyps.size(); ++i) benchmark::DoNotOptimize(metrics::rouge_l_sum(hyps[i], refs[i]));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_RougeLSum);

void BM_GaleChurchAlign(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> len(20, 200);
  std::vector<std::size_t> src, tgt;
  for (std::size_t i = 0; i < n; ++i) {
    src.push_back(len(rng));
    tgt.push_back(src.back() + len(rng) % 15);
  }
  for (auto _ : state) benchmark::DoNotOptimize(corpus::gale_church_align(src, tgt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_GaleChurchAlign)->Arg(50)->Arg(500);

void BM_SentenceSegmentation(benchmark::State& state) {
  std::string text;
  for (const auto& s : sentences(200, 7)) text += s + " ";
  const auto& segmenter = corpus::SentenceSegmenter::standard();
  for (auto _ : state) benchmark::DoNotOptimize(segmenter.split(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_SentenceSegmentation);

void BM_StubSweep(benchmark::State& state) {
  auto lexicon = std::make_shared<stub::Lexicon>();
  lexicon->general = {{"the", "el"}, {"patient", "paciente"}, {"has", "tiene"}, {"and", "y"}};
  lexicon->concepts["fever"]["es"] = {"fiebre"};
  stub::LexiconBackend backend(lexicon, "bench", {});
  std::vector<corpus::SentencePair> pairs;
  for (int i = 0; i < 50; ++i) {
    corpus::SentencePair p;
    p.pair_id = "p" + std::to_string(1000 + i);
    p.source = "The patient has fever and cough number " + std::to_string(i) + ".";
    p.reference = "El paciente tiene fiebre y tos.";
    pairs.push_back(p);
  }
  translate::RunConfig config;
  config.strategies = {prompts::PromptStrategy::kDirect};
  config.model.name = "bench";
  config.model.kind = chat::EndpointKind::kStub;
  config.model.stub_lexicon = "unused";
  for (auto _ : state) benchmark::DoNotOptimize(translate::sweep(pairs, {}, config, backend));
  state.SetItemsProcessed(state.iterations() * 50 * 5);
}
BENCHMARK(BM_StubSweep)->UseRealTime();

void BM_WelchTTest(benchmark::State& state) {
  const std::vector<double> a = {40, 41, 42, 43, 44};
  const std::vector<double> b = {38.1, 39.4, 38.9, 40.2, 39.0};
  for (auto _ : state) benchmark::DoNotOptimize(stats::welch_t_test(a, b, "a", "b"));
}
BENCHMARK(BM_WelchTTest);

}  // namespace

BENCHMARK_MAIN();
