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
#include "medxlate/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "medxlate/corpus.hpp"
#include "medxlate/error.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/knowledge.hpp"
#include "medxlate/scorer.hpp"
#include "medxlate/text.hpp"

namespace medxlate::harness {

namespace fs = std::filesystem;
using jsonl::Json;
using metrics::Metric;
using prompts::PromptStrategy;
using stats::Block;
using translate::TranslationResult;

// ---------------------------------------------------------------------------
// Experiment configuration

std::vector<PromptStrategy> ExperimentSpec::strategies_for(Block block) const {
  const auto it = strategies.find(block);
  if (it != strategies.end()) return it->second;
  if (!stats::uses_medcod(block)) return {PromptStrategy::kDirect};
  return {PromptStrategy::kLlmKbMultilingual, PromptStrategy::kLlmKbSynonyms, PromptStrategy::kUmlsDict};
}

stats::BlockMap ExperimentSpec::block_map() const {
  stats::BlockMap map;
  for (const auto& f : families) {
    map.families.push_back({f.name, f.base ? f.base->name : std::string(), f.finetuned ? f.finetuned->name : std::string()});
  }
  map.baselines = baselines;
  return map;
}

void ExperimentSpec::validate() const {
  const std::string where = "experiment '" + name + "': ";
  if (name.empty()) throw ConfigError("experiment needs a name");
  if (corpus.empty() == articles.empty()) throw ConfigError(where + "set exactly one of 'corpus' and 'articles'");
  if (!articles.empty() && test_size == 0) throw ConfigError(where + "'articles' needs a positive 'test_size'");
  if (split != "test" && split != "train" && split != "all") {
    throw ConfigError(where + "split must be test, train or all");
  }
  if (families.empty()) throw ConfigError(where + "no model families");
  if (blocks.empty()) throw ConfigError(where + "no blocks");

  translate::RunConfig run;
  run.temperatures = temperatures;
  run.model.name = "validation";
  run.model.kind = chat::EndpointKind::kStub;
  run.model.stub_lexicon = "unused";
  run.validate();

  std::set<std::string> family_names;
  std::set<std::string> endpoint_names;
  for (const auto& f : families) {
    if (f.name.empty()) throw ConfigError(where + "model family without a name");
    if (!family_names.insert(f.name).second) throw ConfigError(where + "duplicate family '" + f.name + "'");
    for (const auto* e : {f.base ? &*f.base : nullptr, f.finetuned ? &*f.finetuned : nullptr}) {
      if (!e) continue;
      e->validate();
      if (!endpoint_names.insert(e->name).second) {
        throw ConfigError(where + "endpoint name '" + e->name + "' is used twice");
      }
    }
  }

  const std::set<Block> present(blocks.begin(), blocks.end());
  if (present.size() != blocks.size()) throw ConfigError(where + "duplicate block");
  for (const Block b : blocks) {
    const std::string bn(stats::to_string(b));
    for (const auto& f : families) {
      if (stats::uses_finetuned(b) ? !f.finetuned : !f.base) {
        throw ConfigError(where + "block " + bn + " needs a " + (stats::uses_finetuned(b) ? "finetuned" : "base") +
                          " endpoint for family '" + f.name + "'");
      }
    }
    const auto list = strategies_for(b);
    if (list.empty()) throw ConfigError(where + "block " + bn + " has no strategies");
    for (const auto s : list) {
      if (prompts::is_structured(s) != stats::uses_medcod(b)) {
        throw ConfigError(where + "block " + bn + " cannot use strategy " + std::string(prompts::to_string(s)) +
                          (stats::uses_medcod(b) ? " (structured strategies only)" : " (direct only)"));
      }
    }
    if (stats::uses_medcod(b) && !enrichment.present()) {
      throw ConfigError(where + "block " + bn + " needs an enrichment source (enrichment.kb or enrichment.umls)");
    }
    const auto base = baselines.find(b);
    if (base != baselines.end() && !present.count(base->second)) {
      throw ConfigError(where + "block " + bn + " is compared against " + std::string(stats::to_string(base->second)) +
                        ", which is not part of the experiment; add it or override 'baselines'");
    }
  }
  for (const auto& [b, list] : strategies) {
    if (!present.count(b)) {
      throw ConfigError(where + "strategies given for block " + std::string(stats::to_string(b)) + " which is not run");
    }
  }
  if (enrichment.kb) enrichment.kb->validate();
  if (jobs == 0) throw ConfigError(where + "jobs must be at least 1");
}

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

chat::EndpointConfig endpoint_entry(const Json& j, const fs::path& base_dir) {
  if (j.is_string()) {
    const fs::path path = resolve(base_dir, j.get<std::string>());
    Json parsed;
    try {
      parsed = Json::parse(jsonl::read_file(path));
    } catch (const Json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    try {
      return chat::endpoint_from_json(parsed, path.parent_path());
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  if (j.is_object()) return chat::endpoint_from_json(j, base_dir);
  throw ConfigError("endpoint entries must be objects or file paths");
}

std::vector<std::string> string_list(const Json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError("'" + key + "' must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

ExperimentSpec spec_from_json(const Json& j, const fs::path& base_dir) {
  static const std::set<std::string> kKeys = {
      "name", "corpus", "articles", "test_size", "split_seed", "split", "limit", "source_lang", "target_lang",
      "aux_langs", "families", "blocks", "strategies", "temperatures", "metrics", "lowercase", "enrichment",
      "scorer", "baselines", "seed_note", "jobs", "description"};
  if (!j.is_object()) throw ConfigError("experiment file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) throw ConfigError("experiment file: unknown key '" + key + "'");
  }
  ExperimentSpec s;
  try {
    s.name = j.value("name", std::string());
    if (j.contains("corpus")) s.corpus = resolve(base_dir, j.at("corpus").get<std::string>());
    if (j.contains("articles")) s.articles = resolve(base_dir, j.at("articles").get<std::string>());
    s.test_size = j.value("test_size", std::size_t{0});
    s.split_seed = j.value("split_seed", s.split_seed);
    s.split = j.value("split", s.split);
    s.limit = j.value("limit", std::size_t{0});
    s.source_lang = j.value("source_lang", s.source_lang);
    s.target_lang = j.value("target_lang", s.target_lang);
    if (j.contains("aux_langs")) s.aux_langs = string_list(j.at("aux_langs"), "aux_langs");
    if (j.contains("families")) {
      for (const auto& f : j.at("families")) {
        FamilySpec family;
        family.name = f.value("name", std::string());
        if (f.contains("base")) family.base = endpoint_entry(f.at("base"), base_dir);
        if (f.contains("finetuned")) family.finetuned = endpoint_entry(f.at("finetuned"), base_dir);
        s.families.push_back(std::move(family));
      }
    }
    if (j.contains("blocks")) {
      s.blocks.clear();
      for (const auto& b : string_list(j.at("blocks"), "blocks")) s.blocks.push_back(stats::block_from_string(b));
    }
    if (j.contains("strategies")) {
      for (const auto& [block, list] : j.at("strategies").items()) {
        auto& out = s.strategies[stats::block_from_string(block)];
        for (const auto& name : string_list(list, "strategies." + block)) {
          out.push_back(prompts::strategy_from_string(name));
        }
      }
    }
    if (j.contains("temperatures")) s.temperatures = j.at("temperatures").get<std::vector<double>>();
    if (j.contains("metrics")) {
      s.metrics.clear();
      for (const auto& m : string_list(j.at("metrics"), "metrics")) s.metrics.push_back(metrics::metric_from_string(m));
    }
    s.lowercase = j.value("lowercase", false);
    if (j.contains("enrichment")) {
      const auto& e = j.at("enrichment");
      if (e.contains("kb")) s.enrichment.kb = endpoint_entry(e.at("kb"), base_dir);
      if (e.contains("umls")) s.enrichment.umls = resolve(base_dir, e.at("umls").get<std::string>());
      s.enrichment.quality_check = e.value("quality_check", true);
      if (e.contains("synonym_langs")) s.enrichment.synonym_langs = string_list(e.at("synonym_langs"), "synonym_langs");
    }
    if (j.contains("scorer")) {
      const auto& sc = j.at("scorer");
      if (sc.is_string()) {
        s.scorer = resolve(base_dir, sc.get<std::string>());
      } else {
        s.scorer = resolve(base_dir, sc.at("command").get<std::string>());
        if (sc.contains("args")) s.scorer_args = string_list(sc.at("args"), "scorer.args");
      }
    }
    if (j.contains("baselines")) {
      s.baselines.clear();
      for (const auto& [block, base] : j.at("baselines").items()) {
        s.baselines[stats::block_from_string(block)] = stats::block_from_string(base.get<std::string>());
      }
    }
    s.seed_note = j.value("seed_note", std::string());
    s.jobs = j.value("jobs", 4u);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment file: ") + e.what());
  }
  return s;
}

ExperimentSpec load_spec(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(jsonl::read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    auto spec = spec_from_json(j, path.parent_path());
    spec.validate();
    return spec;
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Tables

void sort_table(ResultTable& table) {
  std::stable_sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.model, a.block, a.strategy, a.metric) < std::tie(b.model, b.block, b.strategy, b.metric);
  });
}

std::vector<Selection> best_per_model(const ResultTable& table) {
  using Key = std::tuple<std::string, bool, Metric>;
  std::map<Key, std::vector<const stats::SummaryRow*>> groups;
  for (const auto& r : table.rows) groups[{r.model, stats::uses_finetuned(r.block), r.metric}].push_back(&r);
  std::vector<Selection> out;
  for (auto& [key, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
      return std::tie(a->strategy, a->block) < std::tie(b->strategy, b->block);
    });
    const stats::SummaryRow* best = rows.front();
    for (const auto* r : rows) {
      if (r->ci.mean > best->ci.mean) best = r;
    }
    Selection sel;
    std::tie(sel.model, sel.finetuned, sel.metric) = key;
    sel.strategy = best->strategy;
    sel.block = best->block;
    sel.mean = best->ci.mean;
    sel.tie = std::count_if(rows.begin(), rows.end(), [&](const auto* r) { return r->ci.mean == best->ci.mean; }) > 1;
    out.push_back(sel);
  }
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string block_label(Block b) {
  return std::string(stats::to_string(b)) + (stats::uses_medcod(b) ? " (w/ MedCOD, " : " (w/o MedCOD, ") +
         (stats::uses_finetuned(b) ? "w/ FT)" : "w/o FT)");
}

std::string metric_label(Metric m) {
  switch (m) {
    case Metric::kBleu: return "BLEU";
    case Metric::kChrfpp: return "chrF++";
    case Metric::kRougeLSum: return "ROUGE-L-Sum";
    case Metric::kBertScore: return "BERTScore-F";
    case Metric::kExternal: return "External";
  }
  return "?";
}

}  // namespace

TimingReport timing_report(const std::vector<TranslationResult>& results) {
  TimingReport report;
  report.means = translate::timing_summary(results);
  report.results = results.size();
  return report;
}

std::string TimingReport::markdown() const {
  std::string out = "| Stage | Mean seconds |\n|---|---:|\n";
  const std::pair<const char*, double> stages[] = {
      {"Keyword Extraction", means.keyword_extraction_s},
      {"Keyword Translation (per keyword)", means.keyword_translation_s},
      {"Quality Check for Translated Terms", means.quality_check_s},
      {"Final Sentence Translation (with Prompt)", means.final_translation_s},
      {"Total Average Time per Sentence", means.total_s}};
  for (const auto& [label, value] : stages) out += std::string("| ") + label + " | " + fixed(value, 4) + " |\n";
  return out;
}

Json TimingReport::to_json() const {
  return {{"results", results},
          {"keyword_extraction_s", means.keyword_extraction_s},
          {"keyword_translation_s", means.keyword_translation_s},
          {"quality_check_s", means.quality_check_s},
          {"final_translation_s", means.final_translation_s},
          {"total_s", means.total_s}};
}

std::set<ReportFormat> parse_formats(const std::string& text) {
  std::set<ReportFormat> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = text::trim(item);
    if (item == "csv") {
      out.insert(ReportFormat::kCsv);
    } else if (item == "md" || item == "markdown") {
      out.insert(ReportFormat::kMarkdown);
    } else if (item == "plotdata" || item == "json") {
      out.insert(ReportFormat::kPlotData);
    } else if (!item.empty()) {
      throw ConfigError("unknown report format '" + item + "' (csv, md, plotdata)");
    }
  }
  if (out.empty()) throw ConfigError("no report format selected");
  return out;
}

std::string summary_markdown(const ResultTable& original) {
  ResultTable table = original;
  sort_table(table);
  std::set<Metric> metric_set;
  for (const auto& r : table.rows) metric_set.insert(r.metric);
  const std::vector<Metric> metric_cols(metric_set.begin(), metric_set.end());

  using RowKey = std::tuple<std::string, Block, PromptStrategy>;
  std::map<RowKey, std::map<Metric, const stats::SummaryRow*>> grid;
  for (const auto& r : table.rows) grid[{r.model, r.block, r.strategy}][r.metric] = &r;

  std::string out = "# Results\n\n## Ablation blocks\n\n| Model | Block | Strategy |";
  for (const auto m : metric_cols) out += " " + metric_label(m) + " |";
  out += "\n|---|---|---|";
  for (std::size_t i = 0; i < metric_cols.size(); ++i) out += "---:|";
  out += "\n";
  for (const auto& [key, cells] : grid) {
    const auto& [model, block, strategy] = key;
    out += "| " + model + " | " + block_label(block) + " | " + std::string(prompts::to_string(strategy)) + " |";
    for (const auto m : metric_cols) {
      const auto it = cells.find(m);
      if (it == cells.end()) {
        out += " |";
        continue;
      }
      const auto& r = *it->second;
      out += " " + fixed(r.ci.mean, 2) + (r.starred ? "*" : "") + " [" + fixed(r.ci.lo, 2) + ", " + fixed(r.ci.hi, 2) +
             "] |";
    }
    out += "\n";
  }

  std::map<Block, Block> used;
  for (const auto& r : table.rows) {
    if (r.baseline) used[r.block] = *r.baseline;
  }
  out += "\nValues are means over temperature runs with 95% confidence intervals.";
  if (!used.empty()) {
    out += " An asterisk marks a significant difference (Welch t-test, p < 0.05) against the block's baseline:";
    bool first = true;
    for (const auto& [b, base] : used) {
      out += std::string(first ? " " : ", ") + std::string(stats::to_string(b)) + " vs " +
             std::string(stats::to_string(base));
      first = false;
    }
    out += ".";
  }
  out += "\n\n## Best prompt per model\n\n| Model | Strategy |";
  for (const auto m : metric_cols) out += " " + metric_label(m) + " |";
  out += "\n|---|---|";
  for (std::size_t i = 0; i < metric_cols.size(); ++i) out += "---:|";
  out += "\n";

  const auto best = best_per_model(table);
  using EndpointKey = std::pair<std::string, bool>;
  std::map<EndpointKey, std::map<std::pair<PromptStrategy, Block>, std::map<Metric, const stats::SummaryRow*>>> by_endpoint;
  for (const auto& r : table.rows) {
    by_endpoint[{r.model, stats::uses_finetuned(r.block)}][{r.strategy, r.block}][r.metric] = &r;
  }
  for (const auto& [ek, strategies] : by_endpoint) {
    const std::string model_label = ek.first + (ek.second ? " (FT)" : "");
    for (const auto& [sk, cells] : strategies) {
      out += "| " + model_label + " | " + std::string(prompts::to_string(sk.first)) + " |";
      for (const auto m : metric_cols) {
        const auto it = cells.find(m);
        if (it == cells.end()) {
          out += " |";
          continue;
        }
        const bool bold = std::any_of(best.begin(), best.end(), [&](const Selection& s) {
          return s.model == ek.first && s.finetuned == ek.second && s.metric == m && s.strategy == sk.first &&
                 s.block == sk.second;
        });
        const std::string v = fixed(it->second->ci.mean, 2);
        out += " " + (bold ? "**" + v + "**" : v) + " |";
      }
      out += "\n";
    }
  }
  out += "\nBold marks the best strategy per model and metric";
  const bool any_tie = std::any_of(best.begin(), best.end(), [](const Selection& s) { return s.tie; });
  out += any_tie ? "; ties go to the first strategy in enum order.\n" : ".\n";
  return out;
}

Json plot_data(const ResultTable& original) {
  ResultTable table = original;
  sort_table(table);
  using Key = std::pair<std::string, Metric>;
  std::map<Key, std::map<Block, Json>> series;
  for (const auto& r : table.rows) {
    auto& bars = series[{r.model, r.metric}][r.block];
    if (bars.is_null()) bars = Json::array();
    bars.push_back({{"strategy", std::string(prompts::to_string(r.strategy))},
                    {"mean", r.ci.mean},
                    {"ci_lo", r.ci.lo},
                    {"ci_hi", r.ci.hi},
                    {"starred", r.starred}});
  }
  Json out = {{"format_version", table.format_version}, {"series", Json::array()}};
  for (const auto& [key, groups] : series) {
    Json s = {{"model", key.first}, {"metric", std::string(metrics::to_string(key.second))}, {"groups", Json::array()}};
    for (const auto& [block, bars] : groups) {
      s["groups"].push_back({{"block", std::string(stats::to_string(block))}, {"bars", bars}});
    }
    out["series"].push_back(std::move(s));
  }
  return out;
}

void emit_report(const ResultTable& original, const fs::path& out_dir, const std::set<ReportFormat>& formats) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  ResultTable table = original;
  sort_table(table);
  if (formats.count(ReportFormat::kCsv)) stats::export_summary_csv(table.rows, out_dir / "summary.csv");
  if (formats.count(ReportFormat::kMarkdown)) jsonl::write_file_atomic(out_dir / "summary.md", summary_markdown(table));
  if (formats.count(ReportFormat::kPlotData)) {
    jsonl::write_file_atomic(out_dir / "plotdata.json", plot_data(table).dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

std::vector<corpus::SentencePair> select_pairs(const ExperimentSpec& spec, const fs::path& out_dir,
                                               const std::function<void(const std::string&)>& log,
                                               std::vector<std::string>& warnings) {
  corpus::AlignedCorpus aligned;
  if (!spec.articles.empty()) {
    corpus::IngestConfig ingest;
    ingest.source_lang = spec.source_lang;
    ingest.target_lang = spec.target_lang;
    const auto ingested = corpus::ingest_articles(spec.articles, ingest);
    for (const auto& w : ingested.warnings) warnings.push_back(w);
    corpus::BuildStats build;
    aligned = corpus::split_corpus(corpus::build_corpus(ingested.articles, ingest, spec.jobs, &build),
                                   spec.test_size, spec.split_seed);
    corpus::export_corpus(aligned, out_dir / "corpus.jsonl");
    log("aligned " + std::to_string(ingested.articles.size()) + " articles into " +
        std::to_string(aligned.pairs.size()) + " pairs");
  } else {
    auto loaded = corpus::load_corpus(spec.corpus);
    for (const auto& w : loaded.warnings) warnings.push_back(w);
    aligned = std::move(loaded.corpus);
  }
  std::vector<corpus::SentencePair> pairs;
  for (const auto& p : aligned.pairs) {
    if (spec.split == "all" || corpus::to_string(p.split) == spec.split) pairs.push_back(p);
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
  if (spec.limit > 0 && pairs.size() > spec.limit) pairs.resize(spec.limit);
  if (pairs.empty()) throw ConfigError("experiment '" + spec.name + "' selects no sentence pairs");
  return pairs;
}

std::vector<knowledge::EnrichmentOutcome> enrichments_for(const ExperimentSpec& spec,
                                                          const std::vector<corpus::SentencePair>& pairs,
                                                          const fs::path& out_dir, const RunOptions& options,
                                                          const std::function<void(const std::string&)>& log) {
  const fs::path path = out_dir / "enrichments.jsonl";
  if (fs::exists(path)) {
    auto loaded = knowledge::load_enrichments(path);
    std::set<std::string> have;
    for (const auto& o : loaded) have.insert(o.enrichment.pair_id);
    if (std::all_of(pairs.begin(), pairs.end(), [&](const auto& p) { return have.count(p.pair_id) > 0; })) {
      log("reusing " + std::to_string(loaded.size()) + " enrichments");
      return loaded;
    }
  }
  std::optional<knowledge::UmlsSnapshot> snapshot;
  if (!spec.enrichment.umls.empty()) snapshot = knowledge::UmlsSnapshot::load(spec.enrichment.umls);
  std::unique_ptr<chat::Backend> kb_backend;
  std::optional<knowledge::KbCache> cache;
  std::optional<knowledge::KbClient> kb;
  if (spec.enrichment.kb) {
    kb_backend = chat::make_backend(*spec.enrichment.kb);
    cache.emplace(out_dir / "kb-cache.jsonl");
    knowledge::KbOptions kb_options;
    kb_options.kb_model = spec.enrichment.kb->name;
    kb_options.source_lang = spec.source_lang;
    kb_options.target_lang = spec.target_lang;
    kb_options.retry = spec.enrichment.kb->retry;
    if (options.sleeper) kb_options.sleeper = options.sleeper;
    kb.emplace(*kb_backend, kb_options, &*cache);
  }
  knowledge::EnrichmentConfig config;
  config.aux_langs = spec.aux_langs;
  config.synonym_langs = spec.enrichment.synonym_langs;
  config.use_kb = kb.has_value();
  config.quality_check = spec.enrichment.quality_check;
  auto outcomes = knowledge::enrich_all(pairs, config, kb ? &*kb : nullptr, snapshot ? &*snapshot : nullptr, spec.jobs);
  knowledge::export_enrichments(outcomes, path);
  log("enriched " + std::to_string(outcomes.size()) + " pairs");
  return outcomes;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentSpec& spec, const fs::path& out_dir, const RunOptions& options) {
  spec.validate();
  const auto log = options.log ? options.log : [](const std::string&) {};
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  ExperimentOutcome outcome;
  const auto pairs = select_pairs(spec, out_dir, log, outcome.warnings);

  const bool needs_enrichment =
      std::any_of(spec.blocks.begin(), spec.blocks.end(), [](Block b) { return stats::uses_medcod(b); });
  std::vector<knowledge::EnrichmentOutcome> enrichments;
  if (needs_enrichment) enrichments = enrichments_for(spec, pairs, out_dir, options, log);

  prompts::RenderOptions render;
  render.source_lang = spec.source_lang;
  render.target_lang = spec.target_lang;
  render.aux_langs = spec.aux_langs;
  if (!spec.enrichment.synonym_langs.empty()) render.synonym_langs = spec.enrichment.synonym_langs;

  struct EndpointRun {
    const chat::EndpointConfig* endpoint;
    std::vector<PromptStrategy> strategies;
  };
  std::vector<EndpointRun> runs;
  for (const auto& f : spec.families) {
    for (const bool ft : {false, true}) {
      std::set<PromptStrategy> strategies;
      for (const Block b : spec.blocks) {
        if (stats::uses_finetuned(b) != ft) continue;
        for (const auto s : spec.strategies_for(b)) strategies.insert(s);
      }
      if (strategies.empty()) continue;
      runs.push_back({ft ? &*f.finetuned : &*f.base, {strategies.begin(), strategies.end()}});
    }
  }

  std::set<std::string> expected;
  for (const auto& run : runs) {
    for (const auto& p : pairs) {
      for (const auto s : run.strategies) {
        for (const double t : spec.temperatures) {
          expected.insert(translate::cell_digest(p.pair_id, s, t, run.endpoint->name, render.template_version));
        }
      }
    }
  }

  const fs::path results_path = out_dir / "results.jsonl";
  std::map<std::string, TranslationResult> merged;
  if (fs::exists(results_path)) {
    for (auto& r : translate::load_results(results_path)) {
      const std::string digest = translate::cell_digest(r);
      if (!expected.count(digest)) continue;
      const auto it = merged.find(digest);
      if (it == merged.end() || r.ok() || !it->second.ok()) merged[digest] = std::move(r);
    }
  }
  std::set<std::string> completed;
  for (const auto& [digest, r] : merged) {
    if (r.ok()) completed.insert(digest);
  }
  outcome.skipped_cells = completed.size();

  {
    translate::ResultWriter writer(results_path);
    for (const auto& run : runs) {
      if (options.cancel && options.cancel->load()) break;
      translate::RunConfig config;
      config.temperatures = spec.temperatures;
      config.strategies = run.strategies;
      config.model = *run.endpoint;
      config.seed_note = spec.seed_note;
      config.render = render;
      auto backend = chat::make_backend(*run.endpoint);
      translate::SweepHooks hooks;
      hooks.on_result = [&](const TranslationResult& r) { writer.write(r); };
      hooks.completed = completed;
      hooks.cancel = options.cancel;
      hooks.sleeper = options.sleeper;
      hooks.timer = options.timer;
      auto fresh = translate::sweep(pairs, enrichments, config, *backend, hooks);
      log("endpoint " + run.endpoint->name + ": " + std::to_string(fresh.size()) + " new cells");
      outcome.new_cells += fresh.size();
      for (auto& r : fresh) merged[translate::cell_digest(r)] = std::move(r);
    }
  }

  for (auto& [digest, r] : merged) outcome.results.push_back(std::move(r));
  translate::sort_results(outcome.results);
  translate::export_results(outcome.results, results_path);
  outcome.failed_cells =
      static_cast<std::size_t>(std::count_if(outcome.results.begin(), outcome.results.end(), [](const auto& r) { return !r.ok(); }));
  if (outcome.failed_cells > 0) {
    outcome.warnings.push_back(std::to_string(outcome.failed_cells) + " cells failed; rerun to retry them");
  }
  if (options.cancel && options.cancel->load()) {
    outcome.warnings.push_back("run cancelled; partial results kept in " + results_path.string());
    return outcome;
  }

  std::unique_ptr<metrics::ScorerHandle> scorer;
  if (!spec.scorer.empty()) {
    try {
      metrics::ScorerOptions so;
      so.args = spec.scorer_args;
      scorer = metrics::ScorerHandle::open(spec.scorer, so);
    } catch (const CapabilityError& e) {
      outcome.warnings.push_back(std::string("external scorer unavailable, native metrics only: ") + e.what());
    }
  }
  metrics::EvaluateOptions eval;
  eval.metrics = spec.metrics;
  eval.lowercase = spec.lowercase;
  const auto rows = metrics::score_run(outcome.results, pairs, eval, scorer.get());
  metrics::export_report_jsonl(rows, out_dir / "report.jsonl");
  metrics::export_report_csv(rows, out_dir / "report.csv");

  const auto map = spec.block_map();
  jsonl::write_file_atomic(out_dir / "blocks.json", stats::block_map_to_json(map).dump(2) + "\n");
  outcome.table.rows = stats::summarize(stats::samples_from_report(rows, map), map);
  sort_table(outcome.table);
  emit_report(outcome.table, out_dir);

  std::vector<TranslationResult> timed;
  for (const auto& r : outcome.results) {
    if (r.ok() && prompts::is_structured(r.strategy)) timed.push_back(r);
  }
  if (timed.empty()) {
    for (const auto& r : outcome.results) {
      if (r.ok()) timed.push_back(r);
    }
  }
  if (!timed.empty()) {
    outcome.timing = timing_report(timed);
    jsonl::write_file_atomic(out_dir / "timing.md", outcome.timing->markdown());
    jsonl::write_file_atomic(out_dir / "timing.json", outcome.timing->to_json().dump(2) + "\n");
  }
  return outcome;
}

ResultTable table_from_run_dir(const fs::path& run_dir) {
  const auto rows = metrics::load_report(run_dir / "report.jsonl");
  const auto map = stats::load_block_map(run_dir / "blocks.json");
  ResultTable table;
  table.rows = stats::summarize(stats::samples_from_report(rows, map), map);
  sort_table(table);
  return table;
}

}  // namespace medxlate::harness
