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
#include "medxlate/evaluate.hpp"

#include <charconv>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "medxlate/error.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/text.hpp"

namespace medxlate::metrics {

namespace fs = std::filesystem;
using jsonl::Json;
using translate::TranslationResult;

std::string_view to_string(RowLevel level) { return level == RowLevel::kCorpus ? "corpus" : "segment"; }

std::vector<Metric> parse_metric_list(const std::string& text) {
  std::vector<Metric> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = text::trim(item);
    if (item.empty()) continue;
    const Metric m = metric_from_string(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw ConfigError("metric list is empty");
  return out;
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

using CellKey = std::tuple<std::string, prompts::PromptStrategy, double>;

ReportRow segment_row(const CellKey& key, const std::string& pair_id, const MetricScore& score) {
  ReportRow row;
  row.level = RowLevel::kSegment;
  std::tie(row.model, row.strategy, row.temperature) = key;
  row.pair_id = pair_id;
  row.metric = score.metric;
  row.value = score.value;
  row.components = score.components;
  row.flags = score.flags;
  return row;
}

ReportRow mean_row(const CellKey& key, Metric metric, const std::vector<ReportRow>& segments) {
  ReportRow row;
  std::tie(row.model, row.strategy, row.temperature) = key;
  row.metric = metric;
  row.segments = segments.size();
  if (segments.empty()) {
    row.flags.push_back("no_segments");
    return row;
  }
  const auto n = static_cast<double>(segments.size());
  for (const auto& s : segments) {
    row.value += s.value / n;
    for (const auto& [name, v] : s.components) row.components[name] += v / n;
  }
  return row;
}

}  // namespace

std::vector<ReportRow> score_run(const std::vector<TranslationResult>& results,
                                 const std::vector<corpus::SentencePair>& corpus,
                                 const EvaluateOptions& options, ScorerHandle* handle) {
  std::unordered_map<std::string, const corpus::SentencePair*> by_id;
  for (const auto& p : corpus) by_id.emplace(p.pair_id, &p);

  std::map<CellKey, std::vector<const TranslationResult*>> cells;
  for (const auto& r : results) {
    if (!by_id.count(r.pair_id)) {
      throw InvalidArgument("result pair_id '" + r.pair_id + "' has no reference in the corpus");
    }
    cells[{r.model_name, r.strategy, r.temperature}].push_back(&r);
  }

  TokenizeOptions tok;
  tok.lowercase = options.lowercase;
  ChrfOptions chrf = options.chrf;
  chrf.lowercase = options.lowercase;
  BleuOptions segment_bleu = options.bleu;
  segment_bleu.smooth = true;

  std::vector<ReportRow> rows;
  for (const auto& [key, members] : cells) {
    std::vector<const TranslationResult*> ok;
    for (const auto* r : members) {
      if (r->ok()) ok.push_back(r);
    }
    std::vector<std::string> hyp_text;
    std::vector<std::string> ref_text;
    std::vector<TokenizedSegment> hyp_tok;
    std::vector<TokenizedSegment> ref_tok;
    for (const auto* r : ok) {
      hyp_text.push_back(r->hypothesis);
      ref_text.push_back(by_id.at(r->pair_id)->reference);
      hyp_tok.push_back(tokenize(hyp_text.back(), TokenMode::kWord, tok));
      ref_tok.push_back(tokenize(ref_text.back(), TokenMode::kWord, tok));
    }

    for (const Metric metric : options.metrics) {
      std::vector<ReportRow> segs;
      ReportRow cell_row;
      switch (metric) {
        case Metric::kBleu:
        case Metric::kChrfpp: {
          for (std::size_t i = 0; i < ok.size(); ++i) {
            const MetricScore s = metric == Metric::kBleu ? bleu_sentence(hyp_tok[i], ref_tok[i], segment_bleu)
                                                          : chrf_pp(hyp_text[i], ref_text[i], chrf);
            segs.push_back(segment_row(key, ok[i]->pair_id, s));
          }
          if (ok.empty()) {
            cell_row = mean_row(key, metric, segs);
            break;
          }
          const MetricScore corpus_score = metric == Metric::kBleu
                                               ? bleu_corpus(hyp_tok, ref_tok, options.bleu)
                                               : chrf_pp_corpus(hyp_text, ref_text, chrf);
          std::tie(cell_row.model, cell_row.strategy, cell_row.temperature) = key;
          cell_row.metric = metric;
          cell_row.value = corpus_score.value;
          cell_row.components = corpus_score.components;
          cell_row.flags = corpus_score.flags;
          cell_row.segments = ok.size();
          break;
        }
        case Metric::kRougeLSum:
          for (std::size_t i = 0; i < ok.size(); ++i) {
            segs.push_back(segment_row(key, ok[i]->pair_id, rouge_l_sum(hyp_tok[i], ref_tok[i])));
          }
          cell_row = mean_row(key, metric, segs);
          break;
        case Metric::kBertScore:
          if (!handle) continue;
          for (std::size_t i = 0; i < ok.size(); ++i) {
            segs.push_back(
                segment_row(key, ok[i]->pair_id, bertscore_external(*handle, hyp_text[i], ref_text[i])));
          }
          cell_row = mean_row(key, metric, segs);
          break;
        case Metric::kExternal: {
          if (!handle) continue;
          std::vector<ScorerTriple> triples;
          for (std::size_t i = 0; i < ok.size(); ++i) {
            triples.push_back({by_id.at(ok[i]->pair_id)->source, hyp_text[i], ref_text[i]});
          }
          const auto scores = triples.empty() ? std::vector<MetricScore>{} : score_external(*handle, triples);
          for (std::size_t i = 0; i < ok.size(); ++i) {
            segs.push_back(segment_row(key, ok[i]->pair_id, scores[i]));
          }
          cell_row = mean_row(key, metric, segs);
          break;
        }
      }
      cell_row.failed_cells = members.size() - ok.size();
      rows.push_back(std::move(cell_row));
      if (options.segment_rows) {
        for (auto& s : segs) rows.push_back(std::move(s));
      }
    }
  }
  return rows;
}

Json to_json(const ReportRow& row) {
  Json j = {{"v", 1},
            {"level", std::string(to_string(row.level))},
            {"model", row.model},
            {"strategy", std::string(prompts::to_string(row.strategy))},
            {"temperature", row.temperature},
            {"metric", std::string(to_string(row.metric))},
            {"value", row.value},
            {"components", row.components},
            {"flags", row.flags}};
  if (row.level == RowLevel::kSegment) {
    j["pair_id"] = row.pair_id;
  } else {
    j["segments"] = row.segments;
    j["failed_cells"] = row.failed_cells;
  }
  return j;
}

ReportRow row_from_json(const Json& j) {
  if (!j.is_object() || j.value("v", 0) != 1) throw SchemaError("report row must be a v1 object");
  ReportRow row;
  try {
    const std::string level = j.at("level").get<std::string>();
    if (level == "corpus") {
      row.level = RowLevel::kCorpus;
    } else if (level == "segment") {
      row.level = RowLevel::kSegment;
    } else {
      throw SchemaError("unknown report level '" + level + "'");
    }
    row.model = j.at("model").get<std::string>();
    row.strategy = prompts::strategy_from_string(j.at("strategy").get<std::string>());
    row.temperature = j.at("temperature").get<double>();
    row.metric = metric_from_string(j.at("metric").get<std::string>());
    row.value = j.at("value").get<double>();
    row.components = j.value("components", std::map<std::string, double>{});
    row.flags = j.value("flags", std::vector<std::string>{});
    row.pair_id = j.value("pair_id", std::string());
    row.segments = j.value("segments", std::size_t{0});
    row.failed_cells = j.value("failed_cells", std::size_t{0});
  } catch (const ConfigError& e) {
    throw SchemaError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("report row: ") + e.what());
  }
  return row;
}

void export_report_jsonl(const std::vector<ReportRow>& rows, const fs::path& path) {
  std::string out;
  for (const auto& r : rows) {
    out += jsonl::dump_line(to_json(r));
    out += '\n';
  }
  jsonl::write_file_atomic(path, out);
}

void export_report_csv(const std::vector<ReportRow>& rows, const fs::path& path) {
  std::string out = "level,model,strategy,temperature,pair_id,metric,value,segments,failed_cells\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.level)) + ',' + text::csv_field(r.model) + ',' +
           std::string(prompts::to_string(r.strategy)) + ',' + format_number(r.temperature) + ',' +
           text::csv_field(r.pair_id) + ',' + std::string(to_string(r.metric)) + ',' + format_number(r.value) +
           ',' + std::to_string(r.segments) + ',' + std::to_string(r.failed_cells) + '\n';
  }
  jsonl::write_file_atomic(path, out);
}

std::vector<ReportRow> load_report(const fs::path& path) {
  std::vector<ReportRow> out;
  jsonl::for_each(path, [&](const Json& j, std::size_t line) {
    try {
      out.push_back(row_from_json(j));
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace medxlate::metrics
