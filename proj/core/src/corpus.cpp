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

#include "medxlate/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "medxlate/digest.hpp"
#include "medxlate/error.hpp"
#include "medxlate/jsonl.hpp"
#include "medxlate/metrics.hpp"
#include "medxlate/resources.hpp"
#include "medxlate/text.hpp"

namespace medxlate::corpus {

namespace fs = std::filesystem;
using jsonl::Json;

std::string_view to_string(Split split) { return split == Split::kTest ? "test" : "train"; }

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw SchemaError("unknown split '" + std::string(name) + "'");
}

const SentencePair* AlignedCorpus::find(std::string_view pair_id) const {
  for (const auto& p : pairs) {
    if (p.pair_id == pair_id) return &p;
  }
  return nullptr;
}

std::string IngestConfig::digest() const {
  Json j = {{"source_lang", source_lang}, {"target_lang", target_lang}, {"id_field", id_field},
            {"source_field", source_field}, {"target_field", target_field}, {"v", kCorpusSchemaVersion}};
  return sha256_hex(jsonl::dump_line(j)).substr(0, 16);
}

// ---------------------------------------------------------------------------
// Cleaning

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_block_tag(std::string_view tag) {
  static const std::set<std::string, std::less<>> kBlock = {
      "p", "br", "div", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "td",
      "th", "table", "section", "article", "header", "footer", "blockquote", "hr", "dd", "dt"};
  std::string name;
  for (char c : tag) {
    if (!is_ascii_alpha(c) && !(c >= '0' && c <= '9')) break;
    name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return kBlock.count(name) > 0;
}

// One pass of tag removal. Returns true when something was removed.
bool strip_tags_once(std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool changed = false;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<' && i + 1 < s.size()) {
      std::size_t j = i + 1;
      if (s[j] == '/' || s[j] == '!') ++j;
      if (j < s.size() && (is_ascii_alpha(s[j]) || (s[i + 1] == '!' && s[j] == '-'))) {
        const std::size_t close = s.find_first_of("<>", j);
        if (close != std::string::npos && s[close] == '>') {
          const std::string_view tag(s.data() + (s[i + 1] == '/' ? i + 2 : i + 1),
                                     close - i - 1);
          if (is_block_tag(tag)) out.push_back(' ');
          i = close + 1;
          changed = true;
          continue;
        }
      }
    }
    out.push_back(s[i]);
    ++i;
  }
  s = std::move(out);
  return changed;
}

}  // namespace

std::string clean_text(std::string_view raw) {
  std::string s(raw);
  while (strip_tags_once(s)) {
  }
  return text::nfc(text::collapse_whitespace(text::nfc(s)));
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

struct RawRecord {
  std::string id;
  std::optional<std::string> source;
  std::optional<std::string> target;
  std::optional<std::string> url;
  std::string fetched_at;
  std::string where;
};

std::optional<std::string> string_field(const Json& j, const std::string& key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

RawRecord record_from_json(const Json& j, const IngestConfig& config, const std::string& where) {
  if (!j.is_object()) throw SchemaError(where + ": record is not a JSON object");
  RawRecord r;
  r.where = where;
  auto id = j.find(config.id_field);
  if (id == j.end() || !(id->is_string() || id->is_number_integer())) {
    throw SchemaError(where + ": missing or invalid '" + config.id_field + "'");
  }
  r.id = id->is_string() ? id->get<std::string>() : std::to_string(id->get<long long>());
  if (r.id.empty()) throw SchemaError(where + ": empty '" + config.id_field + "'");
  r.source = string_field(j, config.source_field);
  r.target = string_field(j, config.target_field);
  r.url = string_field(j, "source_url");
  r.fetched_at = string_field(j, "fetched_at").value_or("");
  return r;
}

std::string read_text(const fs::path& p) {
  try {
    return jsonl::read_file(p);
  } catch (const IoError&) {
    throw IoError("unreadable file " + p.string());
  }
}

void collect_file(const fs::path& p, const IngestConfig& config, std::vector<RawRecord>& records,
                  std::map<std::string, RawRecord>& text_pairs) {
  const std::string name = p.filename().string();
  const std::string ext = p.extension().string();
  if (ext == ".jsonl") {
    jsonl::for_each(p, [&](const Json& j, std::size_t line) {
      records.push_back(record_from_json(j, config, p.string() + ":" + std::to_string(line)));
    });
  } else if (ext == ".json") {
    Json j;
    try {
      j = Json::parse(read_text(p));
    } catch (const Json::parse_error& e) {
      throw SchemaError(p.string() + ": invalid JSON: " + e.what());
    }
    records.push_back(record_from_json(j, config, p.string()));
  } else if (ext == ".txt") {
    const std::string src_suffix = "." + config.source_lang + ".txt";
    const std::string tgt_suffix = "." + config.target_lang + ".txt";
    auto ends_with = [&](const std::string& suffix) {
      return name.size() > suffix.size() &&
             name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with(src_suffix)) {
      const std::string id = name.substr(0, name.size() - src_suffix.size());
      auto& r = text_pairs[id];
      r.id = id;
      r.where = p.string();
      r.source = read_text(p);
    } else if (ends_with(tgt_suffix)) {
      const std::string id = name.substr(0, name.size() - tgt_suffix.size());
      auto& r = text_pairs[id];
      r.id = id;
      if (r.where.empty()) r.where = p.string();
      r.target = read_text(p);
    }
  }
}

}  // namespace

IngestResult ingest_articles(const fs::path& path, const IngestConfig& config) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw IoError("path does not exist: " + path.string());

  std::vector<RawRecord> records;
  std::map<std::string, RawRecord> text_pairs;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path, ec)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    if (ec) throw IoError("unreadable directory " + path.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) collect_file(f, config, records, text_pairs);
  } else {
    collect_file(path, config, records, text_pairs);
  }
  for (auto& [id, r] : text_pairs) records.push_back(std::move(r));

  IngestResult result;
  std::unordered_set<std::string> seen;
  for (auto& r : records) {
    if (!seen.insert(r.id).second) {
      throw SchemaError(r.where + ": duplicate article id '" + r.id + "'");
    }
    std::string source = r.source ? clean_text(*r.source) : std::string();
    std::string target = r.target ? clean_text(*r.target) : std::string();
    if (source.empty() || target.empty()) {
      ++result.skipped;
      result.warnings.push_back(r.where + ": article '" + r.id + "' is missing its " +
                                (source.empty() ? config.source_lang : config.target_lang) +
                                " text; skipped");
      continue;
    }
    result.articles.push_back({r.id, std::move(source), std::move(target), r.url, r.fetched_at});
  }
  if (result.articles.empty()) throw Error("zero pairs found in " + path.string());
  std::sort(result.articles.begin(), result.articles.end(),
            [](const ArticlePair& a, const ArticlePair& b) { return a.article_id < b.article_id; });
  return result;
}

// ---------------------------------------------------------------------------
// Segmentation

SentenceSegmenter::SentenceSegmenter(std::vector<std::string> abbreviations)
    : abbreviations_(std::move(abbreviations)) {
  std::sort(abbreviations_.begin(), abbreviations_.end());
}

std::vector<std::string> SentenceSegmenter::parse_abbreviations(std::string_view content) {
  std::vector<std::string> out;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    line = text::trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

const SentenceSegmenter& SentenceSegmenter::standard() {
  static const SentenceSegmenter kStandard(
      parse_abbreviations(resources::lookup("abbreviations.txt").value_or("")));
  return kStandard;
}

bool SentenceSegmenter::is_abbreviation(std::string_view word) const {
  return std::binary_search(abbreviations_.begin(), abbreviations_.end(), word);
}

namespace {

bool is_terminal(char32_t cp) {
  return cp == U'.' || cp == U'!' || cp == U'?' || cp == U'…' || cp == U'。';
}

bool is_closer(char32_t cp) {
  return cp == U'"' || cp == U'\'' || cp == U')' || cp == U']' || cp == U'»' || cp == U'”' ||
         cp == U'’';
}

}  // namespace

std::vector<std::string> SentenceSegmenter::split(std::string_view input) const {
  const std::u32string cps = text::to_u32(input);
  std::vector<std::string> sentences;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    std::string s = text::collapse_whitespace(text::to_utf8(
        std::u32string_view(cps).substr(start, end - start)));
    if (!s.empty()) sentences.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!is_terminal(cps[i])) continue;
    std::size_t end = i + 1;
    while (end < cps.size() && (is_terminal(cps[end]) || is_closer(cps[end]))) ++end;
    if (end < cps.size() && !text::is_space(cps[end])) {
      i = end - 1;
      continue;
    }
    // Next visible character must not be lowercase (continuation).
    std::size_t next = end;
    while (next < cps.size() && text::is_space(cps[next])) ++next;
    if (next < cps.size() && text::is_lower(cps[next])) {
      i = end - 1;
      continue;
    }
    if (cps[i] == U'.') {
      std::size_t wb = i;
      while (wb > start && !text::is_space(cps[wb - 1])) --wb;
      const std::string word = text::to_utf8(std::u32string_view(cps).substr(wb, i + 1 - wb));
      std::string bare = word;
      while (!bare.empty() && (bare.front() == '(' || bare.front() == '"')) bare.erase(0, 1);
      const std::u32string bare32 = text::to_u32(bare);
      const bool initial = bare32.size() == 2 && text::is_upper(bare32[0]);
      if (next < cps.size() && (initial || is_abbreviation(bare))) {
        i = end - 1;
        continue;
      }
    }
    emit(end);
    i = end - 1;
  }
  if (start < cps.size()) emit(cps.size());
  return sentences;
}

// ---------------------------------------------------------------------------
// Gale-Church alignment

namespace {

// -log P(match | lengths) for a bead with total lengths (ls, lt).
double length_cost(std::size_t ls, std::size_t lt, const GaleChurchParams& p) {
  if (ls == 0 && lt == 0) return 0.0;
  const double s = static_cast<double>(ls);
  const double t = static_cast<double>(lt);
  const double mean = (s + t / p.mean_ratio) / 2.0;
  const double delta = (s * p.mean_ratio - t) / std::sqrt(mean * p.variance);
  // Two-tailed normal probability of a deviation at least |delta|.
  double prob = std::erfc(std::abs(delta) / std::sqrt(2.0));
  prob = std::max(prob, std::numeric_limits<double>::min());
  return -std::log(prob);
}

}  // namespace

std::vector<Bead> gale_church_align(std::span<const std::size_t> src,
                                    std::span<const std::size_t> tgt,
                                    const GaleChurchParams& params) {
  struct Move {
    std::size_t ds;
    std::size_t dt;
    double prior_cost;
  };
  const Move moves[] = {
      {1, 1, -std::log(params.prior_1_1)}, {1, 0, -std::log(params.prior_1_0)},
      {0, 1, -std::log(params.prior_1_0)}, {2, 1, -std::log(params.prior_2_1)},
      {1, 2, -std::log(params.prior_2_1)}, {2, 2, -std::log(params.prior_2_2)},
  };
  const std::size_t m = src.size();
  const std::size_t n = tgt.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cost((m + 1) * (n + 1), kInf);
  std::vector<int> back((m + 1) * (n + 1), -1);
  auto idx = [n](std::size_t i, std::size_t j) { return i * (n + 1) + j; };
  cost[idx(0, 0)] = 0.0;
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (i == 0 && j == 0) continue;
      double best = kInf;
      int best_move = -1;
      for (int k = 0; k < 6; ++k) {
        const auto& mv = moves[k];
        if (mv.ds > i || mv.dt > j) continue;
        const double prev = cost[idx(i - mv.ds, j - mv.dt)];
        if (prev == kInf) continue;
        std::size_t ls = 0;
        std::size_t lt = 0;
        for (std::size_t a = i - mv.ds; a < i; ++a) ls += src[a];
        for (std::size_t b = j - mv.dt; b < j; ++b) lt += tgt[b];
        const bool deletion = mv.ds == 0 || mv.dt == 0;
        const double c = prev + mv.prior_cost +
                         (deletion && !params.length_cost_on_deletions ? 0.0
                                                                       : length_cost(ls, lt, params));
        // Strict improvement keeps the earliest move on ties (1-1 first).
        if (c < best) {
          best = c;
          best_move = k;
        }
      }
      cost[idx(i, j)] = best;
      back[idx(i, j)] = best_move;
    }
  }
  std::vector<Bead> beads;
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 || j > 0) {
    const auto& mv = moves[back[idx(i, j)]];
    beads.push_back({i - mv.ds, mv.ds, j - mv.dt, mv.dt});
    i -= mv.ds;
    j -= mv.dt;
  }
  std::reverse(beads.begin(), beads.end());
  return beads;
}

AlignmentResult align_segments(std::string_view article_id,
                               const std::vector<std::string>& source_sentences,
                               const std::vector<std::string>& target_sentences,
                               const GaleChurchParams& params) {
  if (source_sentences.empty() || target_sentences.empty()) {
    throw InvalidArgument("article '" + std::string(article_id) + "': " +
                          (source_sentences.empty() ? "source" : "target") +
                          " text segments to zero sentences");
  }
  std::vector<std::size_t> src_len;
  std::vector<std::size_t> tgt_len;
  for (const auto& s : source_sentences) src_len.push_back(text::codepoint_count(s));
  for (const auto& s : target_sentences) tgt_len.push_back(text::codepoint_count(s));

  AlignmentResult result;
  result.beads = gale_church_align(src_len, tgt_len, params);
  result.stats.source_sentences = source_sentences.size();
  result.stats.target_sentences = target_sentences.size();
  for (const auto& bead : result.beads) {
    if (!bead.is_one_to_one()) {
      ++result.stats.dropped_beads;
      continue;
    }
    const std::string& src = source_sentences[bead.source_begin];
    const std::string& ref = target_sentences[bead.target_begin];
    const auto tokens = metrics::word_tokens(src);
    if (tokens.empty() || metrics::word_tokens(ref).empty()) {
      ++result.stats.dropped_beads;
      continue;
    }
    char suffix[32];
    std::snprintf(suffix, sizeof(suffix), "-%04zu", bead.source_begin);
    result.pairs.push_back({std::string(article_id) + suffix, std::string(article_id), src, ref,
                            tokens.size(), Split::kTrain});
  }
  result.stats.kept = result.pairs.size();
  return result;
}

AlignmentResult align_sentences(const ArticlePair& pair, const SentenceSegmenter& segmenter,
                                const GaleChurchParams& params) {
  return align_segments(pair.article_id, segmenter.split(pair.source_text),
                        segmenter.split(pair.target_text), params);
}

AlignedCorpus build_corpus(const std::vector<ArticlePair>& articles, const IngestConfig& config,
                           unsigned jobs, BuildStats* stats) {
  std::vector<std::optional<AlignmentResult>> results(articles.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < articles.size(); i = next++) {
      try {
        results[i] = align_sentences(articles[i]);
      } catch (const InvalidArgument&) {
        results[i].reset();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(articles.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  std::vector<std::size_t> order(articles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return articles[a].article_id < articles[b].article_id;
  });

  AlignedCorpus corpus;
  corpus.provenance = config.digest();
  BuildStats local;
  local.articles = articles.size();
  for (std::size_t i : order) {
    if (!results[i]) {
      ++local.failed_articles;
      continue;
    }
    auto& r = *results[i];
    local.totals.source_sentences += r.stats.source_sentences;
    local.totals.target_sentences += r.stats.target_sentences;
    local.totals.kept += r.stats.kept;
    local.totals.dropped_beads += r.stats.dropped_beads;
    for (auto& p : r.pairs) corpus.pairs.push_back(std::move(p));
  }
  if (stats) *stats = local;
  return corpus;
}

// ---------------------------------------------------------------------------
// Splits

namespace {

// Uniform integer in [0, bound) by rejection; std distributions are not
// reproducible across standard library implementations.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

std::vector<std::vector<std::size_t>> token_length_terciles(const std::vector<SentencePair>& pairs) {
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pairs[a].source_token_count != pairs[b].source_token_count) {
      return pairs[a].source_token_count < pairs[b].source_token_count;
    }
    return pairs[a].pair_id < pairs[b].pair_id;
  });
  std::vector<std::vector<std::size_t>> groups(3);
  const std::size_t base = order.size() / 3;
  const std::size_t extra = order.size() % 3;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    const std::size_t size = base + (g < extra ? 1 : 0);
    groups[g].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                     order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return groups;
}

AlignedCorpus split_corpus(const AlignedCorpus& corpus, std::size_t test_size, std::uint64_t seed) {
  if (test_size > corpus.pairs.size()) {
    throw InvalidArgument("test size " + std::to_string(test_size) + " exceeds corpus size " +
                          std::to_string(corpus.pairs.size()));
  }
  AlignedCorpus out = corpus;
  for (auto& p : out.pairs) p.split = Split::kTrain;
  const auto groups = token_length_terciles(out.pairs);

  // Quotas: larger quotas go to the larger (earlier) terciles.
  std::vector<std::size_t> quota(3, test_size / 3);
  for (std::size_t g = 0; g < test_size % 3; ++g) ++quota[g];
  std::size_t spill = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    if (quota[g] > groups[g].size()) {
      spill += quota[g] - groups[g].size();
      quota[g] = groups[g].size();
    }
  }
  for (std::size_t g = 0; g < 3 && spill > 0; ++g) {
    const std::size_t room = groups[g].size() - quota[g];
    const std::size_t take = std::min(room, spill);
    quota[g] += take;
    spill -= take;
  }

  std::mt19937_64 rng(seed);
  for (std::size_t g = 0; g < 3; ++g) {
    std::vector<std::size_t> members = groups[g];
    // Partial Fisher-Yates: the first quota[g] slots become the sample.
    for (std::size_t k = 0; k < quota[g]; ++k) {
      const std::size_t pick = k + uniform_below(rng, members.size() - k);
      std::swap(members[k], members[pick]);
      out.pairs[members[k]].split = Split::kTest;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_corpus(const AlignedCorpus& corpus) {
  std::string out;
  out += jsonl::dump_line({{"v", kCorpusSchemaVersion}, {"provenance", corpus.provenance}});
  out += '\n';
  for (const auto& p : corpus.pairs) {
    Json j = {{"v", kCorpusSchemaVersion},
              {"pair_id", p.pair_id},
              {"article_id", p.article_id},
              {"source", p.source},
              {"reference", p.reference},
              {"source_token_count", p.source_token_count},
              {"split", to_string(p.split)}};
    out += jsonl::dump_line(j);
    out += '\n';
  }
  return out;
}

void export_corpus(const AlignedCorpus& corpus, const fs::path& path) {
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    if (!ids.insert(corpus.pairs[i].pair_id).second) {
      throw SchemaError("record " + std::to_string(i) + ": duplicate pair_id '" +
                        corpus.pairs[i].pair_id + "'");
    }
  }
  jsonl::write_file_atomic(path, serialize_corpus(corpus));
}

LoadResult load_corpus(const fs::path& path) {
  LoadResult result;
  std::unordered_set<std::string> ids;
  std::size_t index = 0;
  jsonl::for_each(path, [&](const Json& j, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    if (!j.is_object()) throw SchemaError(where + ": record is not an object");
    auto v = j.find("v");
    if (v == j.end() || !v->is_number_integer() || v->get<int>() != kCorpusSchemaVersion) {
      throw SchemaError(where + ": unsupported or missing schema version field 'v'");
    }
    if (!j.contains("pair_id") && j.contains("provenance")) {
      result.corpus.provenance = j.at("provenance").get<std::string>();
      return;
    }
    auto need_string = [&](const char* field) -> std::string {
      auto it = j.find(field);
      if (it == j.end() || !it->is_string()) {
        throw SchemaError(where + " (record " + std::to_string(index) + "): missing field '" +
                          field + "'");
      }
      return it->get<std::string>();
    };
    SentencePair p;
    p.pair_id = need_string("pair_id");
    p.article_id = need_string("article_id");
    p.source = need_string("source");
    p.reference = need_string("reference");
    auto count = j.find("source_token_count");
    if (count == j.end() || !count->is_number_unsigned()) {
      throw SchemaError(where + " (record " + std::to_string(index) +
                        "): missing field 'source_token_count'");
    }
    p.source_token_count = count->get<std::size_t>();
    p.split = split_from_string(need_string("split"));
    if (!ids.insert(p.pair_id).second) {
      throw SchemaError(where + ": duplicate pair_id '" + p.pair_id + "'");
    }
    result.corpus.pairs.push_back(std::move(p));
    ++index;
  });
  if (result.corpus.pairs.empty()) {
    result.warnings.push_back(path.string() + ": corpus file contains no sentence pairs");
  }
  return result;
}

}  // namespace medxlate::corpus
