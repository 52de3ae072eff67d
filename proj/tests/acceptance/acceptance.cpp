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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "medxlate/corpus.hpp"
#include "medxlate/harness.hpp"
#include "medxlate/metrics.hpp"
#include "medxlate/prompts.hpp"
#include "medxlate/stats.hpp"
#include "medxlate/translate.hpp"
#include "oracles/metric_oracles.hpp"
#include "support/generators.hpp"
#include "support/prompt_fixture.hpp"
#include "support/synthetic_corpus.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace medxlate;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kSourceDir = MEDXLATE_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Outcome metric_identity() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst_bleu = 0.0, worst_chrf = 0.0, worst_rouge = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::string s;
    while (s.find_first_not_of(" \n") == std::string::npos) s = testing_support::random_text(rng, 40);
    const auto seg = metrics::tokenize(s, metrics::TokenMode::kWord);
    worst_bleu = std::max(worst_bleu, std::abs(metrics::bleu_sentence(seg, seg).value - 100.0));
    const std::vector<metrics::TokenizedSegment> one = {seg};
    worst_bleu = std::max(worst_bleu, std::abs(metrics::bleu_corpus(one, one).value - 100.0));
    worst_chrf = std::max(worst_chrf, std::abs(metrics::chrf_pp(s, s).value - 100.0));
    worst_rouge = std::max(worst_rouge, std::abs(metrics::rouge_l_sum(s, s).components.at("F_lcs") - 1.0));
  }
  const double elapsed = seconds_since(start);
  return {worst_bleu <= 1e-9 && worst_chrf <= 1e-9 && worst_rouge <= 1e-12 && elapsed < 5.0,
          fmt("max |BLEU-100| %.3g, |chrF++-100| %.3g, |F-1| %.3g", worst_bleu, worst_chrf, worst_rouge) +
              fmt(" in %.3f s", elapsed)};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto h = testing_support::random_sentence(rng, 1, 12, 5);
    const auto r = testing_support::random_sentence(rng, 1, 12, 5);
    const std::vector<metrics::TokenizedSegment> hs = {metrics::tokenize(h, metrics::TokenMode::kWord)};
    const std::vector<metrics::TokenizedSegment> rs = {metrics::tokenize(r, metrics::TokenMode::kWord)};
    worst = std::max(worst, std::abs(metrics::bleu_corpus(hs, rs).value - oracle::bleu({h}, {r})));
    worst = std::max(worst, std::abs(metrics::chrf_pp(h, r).value - oracle::chrf(h, r)));
    worst = std::max(worst, std::abs(metrics::rouge_l_sum(h, r).value - oracle::rouge_l_f(h, r)));
  }
  return {worst <= 1e-9, fmt("50 pairs, max deviation from brute force %.3g", worst)};
}

Outcome bleu_hand_case() {
  const std::vector<metrics::TokenizedSegment> h = {metrics::tokenize("a b c d", metrics::TokenMode::kWord)};
  const std::vector<metrics::TokenizedSegment> r = {metrics::tokenize("a b c d e", metrics::TokenMode::kWord)};
  const auto s = metrics::bleu_corpus(h, r);
  const double bp = s.components.at("BP");
  return {std::abs(s.value - 77.880) <= 0.001 && std::abs(bp - std::exp(-0.25)) <= 1e-12,
          fmt("BLEU %.4f, BP %.6f", s.value, bp)};
}

Outcome ci_procedure() {
  const auto ci = stats::ci95({40, 41, 42, 43, 44});
  const auto flat = stats::ci95({7.5, 7.5, 7.5});
  const bool pass = std::abs(ci.lo - 40.037) <= 0.001 && std::abs(ci.hi - 43.963) <= 0.001 &&
                    std::abs(ci.t_star - 2.776) <= 1e-12 && flat.lo == flat.hi && flat.lo == 7.5;
  return {pass, fmt("[%.4f, %.4f] with t* %.3f", ci.lo, ci.hi, ci.t_star) +
                    fmt("; constant set width %.1f", flat.hi - flat.lo)};
}

Outcome prompt_goldens() {
  const auto pair = testing_support::golden_pair();
  const auto enrichment = testing_support::golden_enrichment();
  std::size_t matched = 0;
  std::vector<std::string> failed;
  for (const auto s : {prompts::PromptStrategy::kDirect, prompts::PromptStrategy::kLlmKbMultilingual,
                       prompts::PromptStrategy::kLlmKbSynonyms, prompts::PromptStrategy::kUmlsDict}) {
    const std::string name(prompts::to_string(s));
    const std::string expected = testing_support::slurp(kSourceDir / "tests" / "golden" / "v1" / (name + ".txt"));
    const auto rendered = prompts::render_prompt(s, pair, &enrichment);
    if (!expected.empty() && rendered.text == expected) {
      ++matched;
    } else {
      failed.push_back(name);
    }
  }
  const auto umls = prompts::render_prompt(prompts::PromptStrategy::kUmlsDict, pair, &enrichment).text;
  const bool line_form = umls.find("\nfever means fiebre.\n") != std::string::npos;
  std::string detail = std::to_string(matched) + "/4 strategies byte-identical";
  for (const auto& f : failed) detail += "; mismatch " + f;
  detail += line_form ? "; '<term> means <term>.' line present" : "; dictionary line form missing";
  return {matched == 4 && line_form, detail};
}

Outcome alignment() {
  auto run = [](std::size_t& kept, std::size_t& correct, std::vector<std::vector<corpus::Bead>>& beads) {
    std::mt19937_64 rng(303);
    kept = correct = 0;
    for (int a = 0; a < 200; ++a) {
      const auto art = testing_support::make_synthetic_article(rng, 20, 0.05);
      const auto r = corpus::align_segments("a", art.source, art.target);
      const std::set<std::pair<std::size_t, std::size_t>> truth(art.truth.begin(), art.truth.end());
      for (const auto& b : r.beads) {
        if (!b.is_one_to_one()) continue;
        ++kept;
        correct += truth.count({b.source_begin, b.target_begin});
      }
      beads.push_back(r.beads);
    }
  };
  std::size_t kept = 0, correct = 0, kept2 = 0, correct2 = 0;
  std::vector<std::vector<corpus::Bead>> first, second;
  run(kept, correct, first);
  run(kept2, correct2, second);
  const double precision = kept ? static_cast<double>(correct) / static_cast<double>(kept) : 0.0;
  return {precision >= 0.95 && first == second,
          fmt("200 articles, %.0f kept beads, precision %.4f, ", static_cast<double>(kept), precision) +
              (first == second ? "deterministic" : "NOT deterministic")};
}

Outcome end_to_end() {
  testing_support::TempDir dir;
  harness::RunOptions options;
  options.sleeper = [](double) {};
  const auto samples = kSourceDir / "samples" / "stub-experiment";

  const auto start = Clock::now();
  const auto single = harness::load_spec(samples / "experiment-base.json");
  const auto a = harness::run_experiment(single, dir / "a", options);
  const double first_run = seconds_since(start);
  harness::run_experiment(single, dir / "b", options);
  const bool identical =
      testing_support::slurp(dir / "a" / "summary.csv") == testing_support::slurp(dir / "b" / "summary.csv");
  const std::size_t rows = translate::load_results(dir / "a" / "results.jsonl").size();

  const auto grid = harness::run_experiment(harness::load_spec(samples / "experiment.json"), dir / "grid", options);
  std::set<stats::Block> blocks;
  bool baselines_ok = true;
  bool starred = false;
  for (const auto& r : grid.table.rows) {
    blocks.insert(r.block);
    starred = starred || r.starred;
    const std::optional<stats::Block> expected =
        r.block == stats::Block::kB1   ? std::nullopt
        : r.block == stats::Block::kB4 ? std::optional(stats::Block::kB3)
                                       : std::optional(stats::Block::kB1);
    baselines_ok = baselines_ok && r.baseline == expected;
    baselines_ok = baselines_ok && (prompts::is_structured(r.strategy) == stats::uses_medcod(r.block));
  }
  const bool md_star = testing_support::slurp(dir / "grid" / "summary.md").find("*") != std::string::npos;
  const bool pass = a.failed_cells == 0 && rows == 200 && identical && first_run < 60.0 && blocks.size() == 4 &&
                    baselines_ok && starred && md_star;
  return {pass, std::to_string(rows) + " result rows" + fmt(" in %.2f s, ", first_run) +
                    (identical ? "summary.csv byte-identical across runs" : "summary.csv differs across runs") +
                    "; grid " + std::to_string(blocks.size()) + " blocks, baselines " +
                    (baselines_ok ? "B2,B3 vs B1 and B4 vs B3" : "WRONG") + (starred ? ", asterisks present" : ", no asterisk")};
}

Outcome timing_summary() {
  translate::TranslationResult r;
  r.pair_id = "p";
  r.strategy = prompts::PromptStrategy::kUmlsDict;
  r.hypothesis = "x";
  r.timing.keyword_extraction_s = 0.8712;
  r.timing.keyword_translation_s = 0.1038;
  r.timing.quality_check_s = 0.4537;
  r.timing.final_translation_s = 8.5765;
  r.timing.recompute_total();
  const auto report = harness::timing_report({r, r, r});
  const double total = report.means.total_s;
  char rounded[32];
  std::snprintf(rounded, sizeof rounded, "%.2f", total);
  return {std::abs(total - 10.005) <= 0.01 && std::string(rounded) == "10.01",
          fmt("total %.4f s, rounded ", total) + rounded};
}

Outcome non_reproducibility_note() {
  const auto recipe = kSourceDir / "docs" / "bring-your-own-endpoint.md";
  const std::string text = testing_support::slurp(recipe);
  const bool ok = !text.empty() && text.find("medxlate ablate") != std::string::npos &&
                  text.find("not reproducible") != std::string::npos;
  return {ok, "published headline scores (e.g. Phi-4 with MedCOD and fine-tuning, BLEU 44.23) need "
              "fine-tuned weights and paid APIs and are not reproducible at desk scale; the property "
              "suites above stand in for them and " +
                  std::string(ok ? "docs/bring-your-own-endpoint.md" : "the missing recipe document") +
                  " regenerates the block grid from live endpoints"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric-identity", metric_identity},
      {"metric-oracle-equivalence", metric_oracles},
      {"bleu-hand-derived", bleu_hand_case},
      {"ci-procedure", ci_procedure},
      {"prompt-goldens", prompt_goldens},
      {"alignment-synthetic", alignment},
      {"end-to-end-stub-run", end_to_end},
      {"timing-summary", timing_summary},
      {"non-reproducibility-note", non_reproducibility_note},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
