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
#include "medxlate/translate.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "medxlate/digest.hpp"
#include "medxlate/error.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/text.hpp"

namespace medxlate::translate {

namespace fs = std::filesystem;
using jsonl::Json;
using prompts::PromptStrategy;

void StageTimings::recompute_total() {
  total_s = keyword_extraction_s + keyword_translation_s + quality_check_s + final_translation_s;
}

void RunConfig::validate() const {
  if (temperatures.empty()) throw ConfigError("run config: temperatures must not be empty");
  for (std::size_t i = 0; i < temperatures.size(); ++i) {
    const double t = temperatures[i];
    if (!std::isfinite(t) || t < 0.0 || t > 2.0) {
      throw ConfigError("run config: temperature " + std::to_string(t) + " outside [0, 2]");
    }
    if (i > 0 && !(temperatures[i - 1] < t)) {
      throw ConfigError("run config: temperatures must be sorted ascending without duplicates");
    }
  }
  if (strategies.empty()) throw ConfigError("run config: strategies must not be empty");
  model.validate();
}

std::vector<double> parse_temperature_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = text::trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("invalid temperature '" + item + "'");
    out.push_back(value);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const auto a = static_cast<unsigned char>(s[i]);
    const auto b = static_cast<unsigned char>(prefix[i]);
    if (std::tolower(a) != std::tolower(b)) return false;
  }
  return true;
}

std::string strip_fences(const std::string& s) {
  std::string t = text::trim(s);
  if (t.rfind("```", 0) != 0) return t;
  const auto first_nl = t.find('\n');
  if (first_nl == std::string::npos) return text::trim(t.substr(3, t.size() - 3));
  std::string body = t.substr(first_nl + 1);
  const auto close = body.rfind("```");
  if (close != std::string::npos) body = body.substr(0, close);
  return text::trim(body);
}

std::string first_line(const std::string& s) {
  return text::trim(s.substr(0, s.find('\n')));
}

}  // namespace

std::string extract_translation(const std::string& raw, const std::string& instruction_line) {
  std::string t = strip_fences(raw);
  const std::string instruction = text::trim(instruction_line);
  if (!instruction.empty() && first_line(t) == instruction) {
    const auto nl = t.find('\n');
    t = nl == std::string::npos ? std::string() : text::trim(t.substr(nl + 1));
  }
  constexpr std::string_view kLabel = "translation:";
  if (starts_with_ci(t, kLabel)) t = text::trim(t.substr(kLabel.size()));
  t = strip_fences(t);
  if (t.empty()) throw EndpointError("empty completion");
  return t;
}

Timer steady_timer() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

TranslationResult translate_one(const prompts::RenderedPrompt& prompt, chat::Backend& backend,
                                double temperature, const CallOptions& options, int* attempts_out) {
  const Timer timer = options.timer ? options.timer : steady_timer();
  const chat::Sleeper sleeper = options.sleeper ? options.sleeper : chat::real_sleeper();

  chat::Request request;
  request.messages.push_back({"user", prompt.text});
  request.temperature = temperature;
  request.task = "translate";
  request.fields["sentence"] = prompt.sentence;
  request.fields["context"] = prompt.context_block;
  request.fields["strategy"] = std::string(prompts::to_string(prompt.strategy));

  TranslationResult r;
  r.pair_id = prompt.pair_id;
  r.strategy = prompt.strategy;
  r.temperature = temperature;
  r.model_name = backend.model_name();
  r.degraded = prompt.degraded;
  r.template_version = prompt.template_version;

  const double start = timer();
  int attempts = 0;
  chat::Response response;
  try {
    response = chat::complete_with_retries(backend, request, options.retry, sleeper, &attempts);
  } catch (...) {
    if (attempts_out) *attempts_out = attempts;
    throw;
  }
  if (attempts_out) *attempts_out = attempts;
  r.timing.final_translation_s = std::max(0.0, timer() - start);
  r.timing.recompute_total();
  r.attempt_count = attempts;
  r.raw_response_digest = sha256_hex(response.text);
  r.hypothesis = extract_translation(response.text, first_line(prompt.text));
  return r;
}

std::string cell_digest(const std::string& pair_id, PromptStrategy strategy, double temperature,
                        const std::string& model_name, const std::string& template_version) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.4f", temperature);
  std::string key = pair_id;
  for (const std::string_view part :
       {prompts::to_string(strategy), std::string_view(temp), std::string_view(model_name),
        std::string_view(template_version)}) {
    key += '\x1f';
    key += part;
  }
  return sha256_hex(key);
}

std::string cell_digest(const TranslationResult& result) {
  return cell_digest(result.pair_id, result.strategy, result.temperature, result.model_name,
                     result.template_version);
}

namespace {

struct Cell {
  std::size_t pair_index;
  PromptStrategy strategy;
  double temperature;
};

}  // namespace

std::vector<TranslationResult> sweep(const std::vector<corpus::SentencePair>& pairs,
                                     const std::vector<knowledge::EnrichmentOutcome>& enrichments,
                                     const RunConfig& config, chat::Backend& backend,
                                     const SweepHooks& hooks) {
  config.validate();

  std::map<std::string, const knowledge::EnrichmentOutcome*> by_pair;
  for (const auto& e : enrichments) by_pair.emplace(e.enrichment.pair_id, &e);
  const bool structured = std::any_of(config.strategies.begin(), config.strategies.end(),
                                      [](PromptStrategy s) { return prompts::is_structured(s); });
  std::vector<const knowledge::EnrichmentOutcome*> enrichment_of(pairs.size(), nullptr);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto it = by_pair.find(pairs[i].pair_id);
    if (it != by_pair.end()) {
      enrichment_of[i] = it->second;
    } else if (structured) {
      throw ConfigError("no enrichment for pair '" + pairs[i].pair_id +
                        "' but a structured strategy was requested");
    }
  }

  const std::string model_name = backend.model_name();
  const std::string template_version = config.render.template_version;
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (const auto strategy : config.strategies) {
      for (const double t : config.temperatures) {
        if (hooks.completed.count(
                cell_digest(pairs[i].pair_id, strategy, t, model_name, template_version))) {
          continue;
        }
        cells.push_back({i, strategy, t});
      }
    }
  }

  CallOptions call;
  call.retry = config.model.retry;
  call.sleeper = hooks.sleeper;
  call.timer = hooks.timer;

  std::vector<std::optional<TranslationResult>> slots(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      if (hooks.cancel && hooks.cancel->load()) return;
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      const Cell& cell = cells[k];
      const auto& pair = pairs[cell.pair_index];
      const auto* outcome = enrichment_of[cell.pair_index];
      TranslationResult r;
      try {
        const auto prompt = prompts::render_prompt(
            cell.strategy, pair, outcome ? &outcome->enrichment : nullptr, config.render);
        int attempts = 0;
        try {
          r = translate_one(prompt, backend, cell.temperature, call, &attempts);
        } catch (const Error& e) {
          r.attempt_count = attempts;
          r.pair_id = pair.pair_id;
          r.strategy = cell.strategy;
          r.temperature = cell.temperature;
          r.model_name = model_name;
          r.degraded = prompt.degraded;
          r.template_version = prompt.template_version;
          r.error = e.what();
        }
      } catch (const Error& e) {
        r.pair_id = pair.pair_id;
        r.strategy = cell.strategy;
        r.temperature = cell.temperature;
        r.model_name = model_name;
        r.template_version = template_version;
        r.error = e.what();
      }
      if (r.ok() && outcome && prompts::is_structured(cell.strategy)) {
        r.timing.keyword_extraction_s = outcome->timings.keyword_extraction_s;
        r.timing.keyword_translation_s = outcome->timings.keyword_translation_s;
        r.timing.quality_check_s = outcome->timings.quality_check_s;
        r.timing.recompute_total();
      }
      if (hooks.on_result) hooks.on_result(r);
      slots[k] = std::move(r);
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.model.max_concurrent)),
                            std::max<std::size_t>(1, cells.size()));
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<TranslationResult> results;
  results.reserve(cells.size());
  for (auto& slot : slots) {
    if (slot) results.push_back(std::move(*slot));
  }
  sort_results(results);
  return results;
}

void sort_results(std::vector<TranslationResult>& results) {
  std::stable_sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    if (a.pair_id != b.pair_id) return a.pair_id < b.pair_id;
    if (a.strategy != b.strategy) return a.strategy < b.strategy;
    if (a.temperature != b.temperature) return a.temperature < b.temperature;
    return a.model_name < b.model_name;
  });
}

StageTimings timing_summary(const std::vector<TranslationResult>& results) {
  if (results.empty()) throw InvalidArgument("timing summary needs at least one result");
  StageTimings sum;
  for (const auto& r : results) {
    sum.keyword_extraction_s += r.timing.keyword_extraction_s;
    sum.keyword_translation_s += r.timing.keyword_translation_s;
    sum.quality_check_s += r.timing.quality_check_s;
    sum.final_translation_s += r.timing.final_translation_s;
  }
  const auto n = static_cast<double>(results.size());
  StageTimings mean;
  mean.keyword_extraction_s = sum.keyword_extraction_s / n;
  mean.keyword_translation_s = sum.keyword_translation_s / n;
  mean.quality_check_s = sum.quality_check_s / n;
  mean.final_translation_s = sum.final_translation_s / n;
  mean.recompute_total();
  return mean;
}

Json to_json(const TranslationResult& r) {
  Json j = {{"v", 1},
            {"pair_id", r.pair_id},
            {"strategy", std::string(prompts::to_string(r.strategy))},
            {"temperature", r.temperature},
            {"hypothesis", r.hypothesis},
            {"timing",
             {{"keyword_extraction_s", r.timing.keyword_extraction_s},
              {"keyword_translation_s", r.timing.keyword_translation_s},
              {"quality_check_s", r.timing.quality_check_s},
              {"final_translation_s", r.timing.final_translation_s},
              {"total_s", r.timing.total_s}}},
            {"model", r.model_name},
            {"attempt_count", r.attempt_count},
            {"raw_response_digest", r.raw_response_digest},
            {"degraded", r.degraded},
            {"template_version", r.template_version}};
  if (r.error) j["error"] = *r.error;
  return j;
}

TranslationResult result_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("result record must be an object");
  if (j.value("v", 0) != 1) throw SchemaError("unsupported result record version");
  for (const char* field : {"pair_id", "strategy", "temperature", "model"}) {
    if (!j.contains(field)) throw SchemaError(std::string("result record lacks '") + field + "'");
  }
  TranslationResult r;
  try {
    r.pair_id = j.at("pair_id").get<std::string>();
    r.strategy = prompts::strategy_from_string(j.at("strategy").get<std::string>());
    r.temperature = j.at("temperature").get<double>();
    r.hypothesis = j.value("hypothesis", std::string());
    r.model_name = j.at("model").get<std::string>();
    r.attempt_count = j.value("attempt_count", 0);
    r.raw_response_digest = j.value("raw_response_digest", std::string());
    r.degraded = j.value("degraded", false);
    r.template_version = j.value("template_version", std::string());
    if (j.contains("timing")) {
      const auto& t = j.at("timing");
      r.timing.keyword_extraction_s = t.value("keyword_extraction_s", 0.0);
      r.timing.keyword_translation_s = t.value("keyword_translation_s", 0.0);
      r.timing.quality_check_s = t.value("quality_check_s", 0.0);
      r.timing.final_translation_s = t.value("final_translation_s", 0.0);
      r.timing.total_s = t.value("total_s", 0.0);
    }
    if (j.contains("error") && !j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  } catch (const ConfigError& e) {
    throw SchemaError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("result record: ") + e.what());
  }
  if (r.ok() && r.hypothesis.empty()) throw SchemaError("successful result has empty hypothesis");
  return r;
}

void export_results(const std::vector<TranslationResult>& results, const fs::path& path) {
  std::string out;
  for (const auto& r : results) {
    out += jsonl::dump_line(to_json(r));
    out += '\n';
  }
  jsonl::write_file_atomic(path, out);
}

std::vector<TranslationResult> load_results(const fs::path& path) {
  std::vector<TranslationResult> out;
  jsonl::for_each(path, [&](const Json& j, std::size_t line) {
    try {
      out.push_back(result_from_json(j));
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

struct ResultWriter::Impl {
  std::mutex mutex;
  std::ofstream out;
};

ResultWriter::ResultWriter(const fs::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path, std::ios::binary | std::ios::app);
  if (!impl_->out) throw IoError("cannot open '" + path.string() + "' for appending");
}

ResultWriter::~ResultWriter() = default;

void ResultWriter::write(const TranslationResult& result) {
  const std::string line = jsonl::dump_line(to_json(result)) + "\n";
  std::lock_guard lock(impl_->mutex);
  impl_->out << line;
  impl_->out.flush();
}

}  // namespace medxlate::translate
