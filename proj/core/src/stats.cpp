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
#include "medxlate/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <tuple>

#include "medxlate/error.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/text.hpp"

namespace medxlate::stats {

namespace fs = std::filesystem;
using jsonl::Json;
using prompts::PromptStrategy;

namespace {

constexpr std::array<double, 30> kTTable95 = {
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
    2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
    2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
constexpr double kNormal95 = 1.960;

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

void require_sample(const std::vector<double>& v, const std::string& what) {
  if (v.size() < 2) {
    throw InvalidArgument(what + " needs at least 2 values, got " + std::to_string(v.size()));
  }
  for (const double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(what + " contains a non-finite value");
  }
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double t_critical_95(int df) {
  if (df < 1) throw InvalidArgument("degrees of freedom must be at least 1");
  if (df > static_cast<int>(kTTable95.size())) return kNormal95;
  return kTTable95[static_cast<std::size_t>(df - 1)];
}

ConfidenceInterval ci95(const std::vector<double>& values) {
  require_sample(values, "confidence interval");
  ConfidenceInterval ci;
  ci.n = values.size();
  ci.mean = mean_of(values);
  ci.stddev = std::sqrt(sample_variance(values, ci.mean));
  ci.se = ci.stddev / std::sqrt(static_cast<double>(ci.n));
  ci.t_star = t_critical_95(static_cast<int>(ci.n) - 1);
  ci.margin = ci.t_star * ci.se;
  ci.lo = ci.mean - ci.margin;
  ci.hi = ci.mean + ci.margin;
  return ci;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

SignificanceResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b,
                                std::string condition_a, std::string condition_b) {
  require_sample(a, "Welch test sample '" + condition_a + "'");
  require_sample(b, "Welch test sample '" + condition_b + "'");
  SignificanceResult r;
  r.condition_a = std::move(condition_a);
  r.condition_b = std::move(condition_b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  const double qa = sample_variance(a, ma) / na;
  const double qb = sample_variance(b, mb) / nb;
  const double se2 = qa + qb;
  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    if (ma == mb) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
    }
  } else {
    r.statistic = (ma - mb) / std::sqrt(se2);
    r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
    const double x = r.df / (r.df + r.statistic * r.statistic);
    r.p_value = std::clamp(incomplete_beta(0.5 * r.df, 0.5, x), 0.0, 1.0);
  }
  r.significant = r.p_value < kAlpha;
  return r;
}

std::string_view to_string(Block block) {
  switch (block) {
    case Block::kB1: return "B1";
    case Block::kB2: return "B2";
    case Block::kB3: return "B3";
    case Block::kB4: return "B4";
  }
  return "B?";
}

Block block_from_string(std::string_view name) {
  if (name == "B1") return Block::kB1;
  if (name == "B2") return Block::kB2;
  if (name == "B3") return Block::kB3;
  if (name == "B4") return Block::kB4;
  throw ConfigError("unknown block '" + std::string(name) + "' (expected B1..B4)");
}

bool uses_medcod(Block block) { return block == Block::kB2 || block == Block::kB4; }
bool uses_finetuned(Block block) { return block == Block::kB3 || block == Block::kB4; }

Block block_for(bool medcod, bool finetuned) {
  if (finetuned) return medcod ? Block::kB4 : Block::kB3;
  return medcod ? Block::kB2 : Block::kB1;
}

std::optional<std::pair<std::string, Block>> BlockMap::classify(const std::string& model,
                                                                PromptStrategy strategy) const {
  const bool medcod = prompts::is_structured(strategy);
  for (const auto& f : families) {
    if (!f.base.empty() && f.base == model) return std::pair{f.name, block_for(medcod, false)};
    if (!f.finetuned.empty() && f.finetuned == model) return std::pair{f.name, block_for(medcod, true)};
  }
  return std::nullopt;
}

BlockMap block_map_from_json(const Json& j) {
  BlockMap map;
  if (!j.is_object() || !j.contains("families") || !j.at("families").is_array()) {
    throw ConfigError("block map needs a 'families' array");
  }
  for (const auto& f : j.at("families")) {
    ModelFamily family;
    family.name = f.value("name", std::string());
    family.base = f.value("base", std::string());
    family.finetuned = f.value("finetuned", std::string());
    if (family.name.empty()) throw ConfigError("block map family without a name");
    if (family.base.empty() && family.finetuned.empty()) {
      throw ConfigError("block map family '" + family.name + "' names no endpoint");
    }
    map.families.push_back(family);
  }
  if (j.contains("baselines")) {
    map.baselines.clear();
    for (const auto& [block, baseline] : j.at("baselines").items()) {
      const Block b = block_from_string(block);
      const Block base = block_from_string(baseline.get<std::string>());
      if (b == base) throw ConfigError("block " + block + " cannot be its own baseline");
      map.baselines[b] = base;
    }
  }
  return map;
}

Json block_map_to_json(const BlockMap& map) {
  Json j;
  j["families"] = Json::array();
  for (const auto& f : map.families) {
    j["families"].push_back({{"name", f.name}, {"base", f.base}, {"finetuned", f.finetuned}});
  }
  j["baselines"] = Json::object();
  for (const auto& [b, base] : map.baselines) j["baselines"][std::string(to_string(b))] = std::string(to_string(base));
  return j;
}

BlockMap load_block_map(const fs::path& path) {
  Json j;
  try {
    j = Json::parse(jsonl::read_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return block_map_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string SampleSet::label() const {
  return model + "/" + std::string(to_string(block)) + "/" + std::string(prompts::to_string(strategy)) + "/" +
         std::string(metrics::to_string(metric));
}

std::vector<SampleSet> samples_from_report(const std::vector<metrics::ReportRow>& rows, const BlockMap& map) {
  using Key = std::tuple<std::string, Block, PromptStrategy, metrics::Metric>;
  std::map<Key, std::map<double, double>> grouped;
  for (const auto& row : rows) {
    if (row.level != metrics::RowLevel::kCorpus) continue;
    const auto where = map.classify(row.model, row.strategy);
    if (!where) throw ConfigError("model '" + row.model + "' belongs to no family in the block map");
    auto& runs = grouped[{where->first, where->second, row.strategy, row.metric}];
    if (!runs.emplace(row.temperature, row.value).second) {
      throw SchemaError("duplicate corpus row for model '" + row.model + "' at temperature " +
                        metrics::format_number(row.temperature));
    }
  }
  std::vector<SampleSet> out;
  for (const auto& [key, runs] : grouped) {
    SampleSet s;
    std::tie(s.model, s.block, s.strategy, s.metric) = key;
    for (const auto& [t, v] : runs) {
      s.temperatures.push_back(t);
      s.values.push_back(v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<SampleSet>& samples, const BlockMap& map) {
  std::vector<const SampleSet*> sorted;
  for (const auto& s : samples) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(), [](const SampleSet* a, const SampleSet* b) {
    return std::tie(a->model, a->block, a->strategy, a->metric) <
           std::tie(b->model, b->block, b->strategy, b->metric);
  });

  std::vector<SummaryRow> out;
  for (const SampleSet* s : sorted) {
    SummaryRow row;
    row.model = s->model;
    row.block = s->block;
    row.strategy = s->strategy;
    row.metric = s->metric;
    try {
      row.ci = ci95(s->values);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(s->label() + ": " + e.what());
    }
    const auto base_it = map.baselines.find(s->block);
    if (base_it != map.baselines.end()) {
      const Block base = base_it->second;
      std::vector<const SampleSet*> candidates;
      for (const SampleSet* c : sorted) {
        if (c->model == s->model && c->block == base && c->metric == s->metric) candidates.push_back(c);
      }
      const SampleSet* match = nullptr;
      for (const SampleSet* c : candidates) {
        if (c->strategy == s->strategy) match = c;
      }
      if (!match && candidates.size() == 1) match = candidates.front();
      if (!match) {
        throw ConfigError("baseline block " + std::string(to_string(base)) + " for " + s->label() +
                          (candidates.empty() ? " is missing" : " has no matching strategy"));
      }
      row.baseline = base;
      row.significance = welch_t_test(s->values, match->values, s->label(), match->label());
      row.starred = row.significance->significant;
    }
    out.push_back(std::move(row));
  }
  return out;
}

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "model,block,strategy,metric,mean,ci_lo,ci_hi,starred\n";
  for (const auto& r : rows) {
    out += text::csv_field(r.model) + ',' + std::string(to_string(r.block)) + ',' + std::string(prompts::to_string(r.strategy)) +
           ',' + std::string(metrics::to_string(r.metric)) + ',' + fixed4(r.ci.mean) + ',' + fixed4(r.ci.lo) +
           ',' + fixed4(r.ci.hi) + ',' + (r.starred ? "true" : "false") + '\n';
  }
  return out;
}

void export_summary_csv(const std::vector<SummaryRow>& rows, const fs::path& path) {
  jsonl::write_file_atomic(path, summary_csv(rows));
}

}  // namespace medxlate::stats
