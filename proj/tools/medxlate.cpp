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
#include <atomic>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "medxlate/chat.hpp"
#include "medxlate/corpus.hpp"
#include "medxlate/error.hpp"
#include "medxlate/evaluate.hpp"
#include "medxlate/harness.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/knowledge.hpp"
#include "medxlate/prompts.hpp"
#include "medxlate/scorer.hpp"
#include "medxlate/stats.hpp"
#include "medxlate/translate.hpp"

namespace fs = std::filesystem;
using namespace medxlate;

namespace {

std::atomic<bool> g_cancel{false};

extern "C" void on_signal(int) { g_cancel.store(true); }

void log_line(const std::string& line) { std::cerr << "medxlate: " << line << "\n"; }

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

chat::EndpointConfig load_endpoint(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(jsonl::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return chat::endpoint_from_json(j, path.parent_path());
}

std::vector<corpus::SentencePair> select_split(const corpus::AlignedCorpus& c, const std::string& split) {
  std::vector<corpus::SentencePair> out;
  for (const auto& p : c.pairs) {
    if (split == "all" || corpus::to_string(p.split) == split) out.push_back(p);
  }
  if (out.empty()) throw ConfigError("no pairs in split '" + split + "'");
  return out;
}

corpus::AlignedCorpus load_corpus_logged(const fs::path& path) {
  auto loaded = corpus::load_corpus(path);
  for (const auto& w : loaded.warnings) log_line("warning: " + w);
  return std::move(loaded.corpus);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Medical machine translation with knowledge-enriched prompts"};
  app.require_subcommand(1);

  // corpus ------------------------------------------------------------------
  auto* corpus_cmd = app.add_subcommand("corpus", "Build and split the aligned sentence corpus");
  corpus_cmd->require_subcommand(1);
  fs::path ingest_in, ingest_out;
  std::string src_lang = "en", tgt_lang = "es";
  unsigned jobs = 4;
  auto* ingest = corpus_cmd->add_subcommand("ingest", "Align bilingual articles into sentence pairs");
  ingest->add_option("--in", ingest_in, "Article directory or file (.en.txt/.es.txt pairs, .json, .jsonl)")->required();
  ingest->add_option("--out", ingest_out, "Output corpus JSONL")->required();
  ingest->add_option("--source-lang", src_lang, "Source language code")->capture_default_str();
  ingest->add_option("--target-lang", tgt_lang, "Target language code")->capture_default_str();
  ingest->add_option("--jobs", jobs, "Worker threads")->capture_default_str();

  fs::path split_in, split_out;
  std::size_t test_size = 100;
  std::uint64_t seed = 13;
  auto* split = corpus_cmd->add_subcommand("split", "Assign a seeded stratified test split");
  split->add_option("--in", split_in, "Corpus JSONL")->required();
  split->add_option("--out", split_out, "Output corpus JSONL (defaults to --in)");
  split->add_option("--test-size", test_size, "Number of test pairs")->capture_default_str();
  split->add_option("--seed", seed, "Split seed")->capture_default_str();

  // enrich ------------------------------------------------------------------
  auto* enrich = app.add_subcommand("enrich", "Attach medical concept knowledge to each sentence");
  fs::path enrich_corpus, kb_config, umls_path, cache_path, enrich_out;
  std::string enrich_split = "test", aux_langs = "fr,pt", synonym_langs;
  bool no_quality_check = false;
  enrich->add_option("--corpus", enrich_corpus, "Corpus JSONL")->required();
  enrich->add_option("--split", enrich_split, "train, test or all")->capture_default_str();
  enrich->add_option("--kb-model", kb_config, "Knowledge-base endpoint config (JSON)");
  enrich->add_option("--aux-langs", aux_langs, "Auxiliary languages")->capture_default_str();
  enrich->add_option("--synonym-langs", synonym_langs, "Synonym languages (default: target plus auxiliaries)");
  enrich->add_option("--umls", umls_path, "UMLS snapshot TSV");
  enrich->add_option("--cache", cache_path, "KB answer cache JSONL");
  enrich->add_option("--out", enrich_out, "Output enrichment JSONL")->required();
  enrich->add_option("--source-lang", src_lang)->capture_default_str();
  enrich->add_option("--target-lang", tgt_lang)->capture_default_str();
  enrich->add_flag("--no-quality-check", no_quality_check, "Skip the KB verification of dictionary entries");
  enrich->add_option("--jobs", jobs, "Worker threads")->capture_default_str();

  // prompts -----------------------------------------------------------------
  auto* prompts_cmd = app.add_subcommand("prompts", "Inspect prompt rendering");
  prompts_cmd->require_subcommand(1);
  auto* render = prompts_cmd->add_subcommand("render", "Print the prompt for one pair");
  std::string render_strategy, render_pair;
  fs::path render_corpus, render_enriched, template_dir;
  render->add_option("--strategy", render_strategy, "direct, llm-kb-multilingual, llm-kb-synonyms, umls-dict")->required();
  render->add_option("--pair", render_pair, "pair_id")->required();
  render->add_option("--corpus", render_corpus, "Corpus JSONL")->required();
  render->add_option("--enriched", render_enriched, "Enrichment JSONL");
  render->add_option("--template-dir", template_dir, "Override the built-in templates");
  render->add_option("--aux-langs", aux_langs)->capture_default_str();

  // translate ---------------------------------------------------------------
  auto* translate_cmd = app.add_subcommand("translate", "Run translation sweeps");
  translate_cmd->require_subcommand(1);
  auto* sweep = translate_cmd->add_subcommand("sweep", "Translate every (pair, strategy, temperature) cell");
  fs::path sweep_corpus, sweep_enriched, model_config, sweep_out;
  std::string strategies = "all", temps = "0.2,0.3,0.4,0.5,0.6", sweep_split = "test", seed_note;
  sweep->add_option("--corpus", sweep_corpus, "Corpus JSONL")->required();
  sweep->add_option("--enriched", sweep_enriched, "Enrichment JSONL (needed by structured strategies)");
  sweep->add_option("--model-config", model_config, "Endpoint config (JSON)")->required();
  sweep->add_option("--strategies", strategies, "Comma list or 'all'")->capture_default_str();
  sweep->add_option("--temps", temps, "Comma list of temperatures")->capture_default_str();
  sweep->add_option("--split", sweep_split, "train, test or all")->capture_default_str();
  sweep->add_option("--seed-note", seed_note, "Free-form reproducibility note");
  sweep->add_option("--aux-langs", aux_langs)->capture_default_str();
  sweep->add_option("--out", sweep_out, "Results JSONL; existing ok cells are skipped")->required();

  // evaluate ----------------------------------------------------------------
  auto* evaluate = app.add_subcommand("evaluate", "Score translation results");
  fs::path eval_results, eval_corpus, scorer_path, eval_out = ".";
  std::string metric_list = "bleu,chrfpp,rouge";
  std::vector<std::string> scorer_args;
  bool lowercase = false;
  evaluate->add_option("--results", eval_results, "Results JSONL")->required();
  evaluate->add_option("--corpus", eval_corpus, "Corpus JSONL")->required();
  evaluate->add_option("--metrics", metric_list, "bleu, chrfpp, rouge, bertscore, external")->capture_default_str();
  evaluate->add_option("--scorer", scorer_path, "External scorer executable");
  evaluate->add_option("--scorer-arg", scorer_args, "Argument passed to the scorer (repeatable)");
  evaluate->add_flag("--lowercase", lowercase, "Case-insensitive scoring");
  evaluate->add_option("--out-dir", eval_out, "Directory for report.jsonl and report.csv")->capture_default_str();

  // stats -------------------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "Confidence intervals and significance");
  stats_cmd->require_subcommand(1);
  auto* summarize = stats_cmd->add_subcommand("summarize", "Summarize a report into ablation rows");
  fs::path report_path, baseline_map, summary_out;
  summarize->add_option("--report", report_path, "report.jsonl")->required();
  summarize->add_option("--baseline-map", baseline_map, "blocks.json")->required();
  summarize->add_option("--out", summary_out, "summary.csv")->required();

  // ablate / report ---------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "Run a full ablation experiment");
  fs::path spec_path, ablate_out;
  ablate->add_option("--spec", spec_path, "experiment.json")->required();
  ablate->add_option("--out", ablate_out, "Run directory")->required();

  auto* report = app.add_subcommand("report", "Re-emit tables from a run directory");
  fs::path report_in, report_out;
  std::string formats = "csv,md,plotdata";
  report->add_option("--in", report_in, "Run directory")->required();
  report->add_option("--format", formats, "csv, md, plotdata")->capture_default_str();
  report->add_option("--out", report_out, "Output directory (defaults to --in)");

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*ingest) {
      corpus::IngestConfig config;
      config.source_lang = src_lang;
      config.target_lang = tgt_lang;
      const auto ingested = corpus::ingest_articles(ingest_in, config);
      for (const auto& w : ingested.warnings) log_line("warning: " + w);
      corpus::BuildStats build;
      const auto built = corpus::build_corpus(ingested.articles, config, jobs, &build);
      corpus::export_corpus(built, ingest_out);
      log_line(std::to_string(build.articles) + " articles, " + std::to_string(built.pairs.size()) + " pairs, " +
               std::to_string(build.totals.dropped_beads) + " non 1-1 beads dropped");
    } else if (*split) {
      const auto c = load_corpus_logged(split_in);
      const auto out = corpus::split_corpus(c, test_size, seed);
      corpus::export_corpus(out, split_out.empty() ? split_in : split_out);
      log_line(std::to_string(test_size) + " of " + std::to_string(out.pairs.size()) + " pairs assigned to test");
    } else if (*enrich) {
      const auto pairs = select_split(load_corpus_logged(enrich_corpus), enrich_split);
      knowledge::EnrichmentConfig config;
      config.aux_langs = split_list(aux_langs);
      config.synonym_langs = split_list(synonym_langs);
      config.quality_check = !no_quality_check;
      config.use_kb = !kb_config.empty();
      if (kb_config.empty() && umls_path.empty()) throw ConfigError("enrich needs --kb-model, --umls or both");
      std::optional<knowledge::UmlsSnapshot> snapshot;
      if (!umls_path.empty()) snapshot = knowledge::UmlsSnapshot::load(umls_path);
      std::unique_ptr<chat::Backend> backend;
      std::optional<knowledge::KbCache> cache;
      std::optional<knowledge::KbClient> kb;
      if (config.use_kb) {
        const auto endpoint = load_endpoint(kb_config);
        backend = chat::make_backend(endpoint);
        if (cache_path.empty()) {
          cache.emplace();
        } else {
          cache.emplace(cache_path);
        }
        knowledge::KbOptions options;
        options.kb_model = endpoint.name;
        options.source_lang = src_lang;
        options.target_lang = tgt_lang;
        options.retry = endpoint.retry;
        kb.emplace(*backend, options, &*cache);
      }
      const auto outcomes = knowledge::enrich_all(pairs, config, kb ? &*kb : nullptr, snapshot ? &*snapshot : nullptr, jobs);
      knowledge::export_enrichments(outcomes, enrich_out);
      log_line("enriched " + std::to_string(outcomes.size()) + " pairs" +
               (cache ? ", cache hits " + std::to_string(cache->hits()) : std::string()));
    } else if (*render) {
      const auto c = load_corpus_logged(render_corpus);
      const auto* pair = c.find(render_pair);
      if (!pair) throw InvalidArgument("unknown pair_id '" + render_pair + "'");
      std::optional<knowledge::ConceptEnrichment> enrichment;
      if (!render_enriched.empty()) {
        for (auto& o : knowledge::load_enrichments(render_enriched)) {
          if (o.enrichment.pair_id == render_pair) enrichment = std::move(o.enrichment);
        }
      }
      prompts::RenderOptions options;
      options.aux_langs = split_list(aux_langs);
      options.template_dir = template_dir;
      const auto prompt = prompts::render_prompt(prompts::strategy_from_string(render_strategy), *pair,
                                                 enrichment ? &*enrichment : nullptr, options);
      std::cout << prompt.text;
      if (prompt.text.empty() || prompt.text.back() != '\n') std::cout << "\n";
      if (prompt.degraded) log_line("warning: no enrichment for this pair; rendered without context");
    } else if (*sweep) {
      const auto pairs = select_split(load_corpus_logged(sweep_corpus), sweep_split);
      std::vector<knowledge::EnrichmentOutcome> enrichments;
      if (!sweep_enriched.empty()) enrichments = knowledge::load_enrichments(sweep_enriched);
      translate::RunConfig config;
      config.temperatures = translate::parse_temperature_list(temps);
      config.strategies = prompts::parse_strategy_list(strategies);
      config.model = load_endpoint(model_config);
      config.seed_note = seed_note;
      config.render.aux_langs = split_list(aux_langs);
      std::vector<translate::TranslationResult> previous;
      if (fs::exists(sweep_out)) previous = translate::load_results(sweep_out);
      translate::SweepHooks hooks;
      for (const auto& r : previous) {
        if (r.ok()) hooks.completed.insert(translate::cell_digest(r));
      }
      hooks.cancel = &g_cancel;
      std::vector<translate::TranslationResult> fresh;
      {
        translate::ResultWriter writer(sweep_out);
        hooks.on_result = [&](const translate::TranslationResult& r) { writer.write(r); };
        const auto backend = chat::make_backend(config.model);
        fresh = translate::sweep(pairs, enrichments, config, *backend, hooks);
      }
      std::map<std::string, translate::TranslationResult> merged;
      for (auto& r : previous) {
        auto d = translate::cell_digest(r);
        if (r.ok() || !merged.count(d)) merged[d] = std::move(r);
      }
      for (auto& r : fresh) merged[translate::cell_digest(r)] = std::move(r);
      std::vector<translate::TranslationResult> all;
      std::size_t failed = 0;
      for (auto& [d, r] : merged) {
        failed += r.ok() ? 0 : 1;
        all.push_back(std::move(r));
      }
      translate::sort_results(all);
      translate::export_results(all, sweep_out);
      log_line(std::to_string(fresh.size()) + " new cells, " + std::to_string(hooks.completed.size()) + " skipped, " +
               std::to_string(failed) + " failed");
      if (g_cancel.load()) {
        log_line("cancelled; partial results kept in " + sweep_out.string());
        return 130;
      }
      return failed > 0 ? 3 : 0;
    } else if (*evaluate) {
      const auto results = translate::load_results(eval_results);
      const auto c = load_corpus_logged(eval_corpus);
      metrics::EvaluateOptions options;
      options.metrics = metrics::parse_metric_list(metric_list);
      options.lowercase = lowercase;
      std::unique_ptr<metrics::ScorerHandle> handle;
      if (!scorer_path.empty()) {
        metrics::ScorerOptions so;
        so.args = scorer_args;
        try {
          handle = metrics::ScorerHandle::open(scorer_path, so);
        } catch (const CapabilityError& e) {
          log_line(std::string("warning: ") + e.what() + "; neural metrics skipped");
        }
      }
      const auto rows = metrics::score_run(results, c.pairs, options, handle.get());
      fs::create_directories(eval_out);
      metrics::export_report_jsonl(rows, eval_out / "report.jsonl");
      metrics::export_report_csv(rows, eval_out / "report.csv");
      log_line(std::to_string(rows.size()) + " report rows written to " + eval_out.string());
    } else if (*summarize) {
      const auto map = stats::load_block_map(baseline_map);
      const auto rows = stats::summarize(stats::samples_from_report(metrics::load_report(report_path), map), map);
      stats::export_summary_csv(rows, summary_out);
      log_line(std::to_string(rows.size()) + " summary rows written to " + summary_out.string());
    } else if (*ablate) {
      const auto spec = harness::load_spec(spec_path);
      harness::RunOptions options;
      options.log = log_line;
      options.cancel = &g_cancel;
      const auto outcome = harness::run_experiment(spec, ablate_out, options);
      for (const auto& w : outcome.warnings) log_line("warning: " + w);
      log_line(std::to_string(outcome.new_cells) + " new cells, " + std::to_string(outcome.skipped_cells) +
               " skipped, " + std::to_string(outcome.table.rows.size()) + " table rows in " + ablate_out.string());
      if (g_cancel.load()) return 130;
    } else if (*report) {
      const auto table = harness::table_from_run_dir(report_in);
      harness::emit_report(table, report_out.empty() ? report_in : report_out, harness::parse_formats(formats));
    }
  } catch (const ConfigError& e) {
    std::cerr << "medxlate: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "medxlate: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
