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

#include "medxlate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "medxlate/error.hpp"
#include "medxlate/text.hpp"

namespace medxlate::metrics {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kBleu: return "bleu";
    case Metric::kChrfpp: return "chrfpp";
    case Metric::kRougeLSum: return "rouge";
    case Metric::kBertScore: return "bertscore";
    case Metric::kExternal: return "external";
  }
  return "unknown";
}

Metric metric_from_string(std::string_view name) {
  if (name == "bleu") return Metric::kBleu;
  if (name == "chrfpp" || name == "chrf++") return Metric::kChrfpp;
  if (name == "rouge" || name == "rouge_l_sum" || name == "rougeLsum") return Metric::kRougeLSum;
  if (name == "bertscore") return Metric::kBertScore;
  if (name == "external" || name == "comet") return Metric::kExternal;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

bool MetricScore::has_flag(std::string_view flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

// ---------------------------------------------------------------------------
// Tokenization

namespace {

void push_word_tokens(std::u32string_view piece, std::vector<std::string>& out) {
  std::size_t begin = 0;
  std::size_t end = piece.size();
  while (begin < end && text::is_punct(piece[begin])) {
    out.push_back(text::to_utf8(piece.substr(begin, 1)));
    ++begin;
  }
  std::vector<std::string> trailing;
  while (end > begin && text::is_punct(piece[end - 1])) {
    trailing.push_back(text::to_utf8(piece.substr(end - 1, 1)));
    --end;
  }
  if (end > begin) out.push_back(text::to_utf8(piece.substr(begin, end - begin)));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

std::string prepare(std::string_view raw, const TokenizeOptions& options) {
  std::string s = text::nfc(raw);
  if (options.lowercase) s = text::nfc(text::lowercase(s));
  return s;
}

}  // namespace

TokenizedSegment tokenize(std::string_view raw, TokenMode mode, const TokenizeOptions& options) {
  TokenizedSegment seg;
  seg.raw = std::string(raw);
  const std::u32string cps = text::to_u32(prepare(raw, options));
  if (mode == TokenMode::kChar) {
    for (char32_t cp : cps) {
      if (!text::is_space(cp)) seg.chars.push_back(cp);
    }
    seg.normalized = text::to_utf8(seg.chars);
    seg.block_ends.push_back(0);
    return seg;
  }
  std::u32string piece;
  auto flush = [&] {
    if (!piece.empty()) push_word_tokens(piece, seg.tokens);
    piece.clear();
  };
  for (char32_t cp : cps) {
    if (cp == U'\n') {
      flush();
      if (seg.block_ends.empty() || seg.block_ends.back() != seg.tokens.size()) {
        seg.block_ends.push_back(seg.tokens.size());
      }
    } else if (text::is_space(cp)) {
      flush();
    } else {
      piece.push_back(cp);
    }
  }
  flush();
  if (seg.block_ends.empty() || seg.block_ends.back() != seg.tokens.size()) {
    seg.block_ends.push_back(seg.tokens.size());
  }
  seg.normalized = text::join(seg.tokens, " ");
  return seg;
}

std::vector<std::string> word_tokens(std::string_view raw, const TokenizeOptions& options) {
  return tokenize(raw, TokenMode::kWord, options).tokens;
}

// ---------------------------------------------------------------------------
// N-grams

NGramCounts word_ngrams(std::span<const std::string> tokens, int order) {
  NGramCounts out;
  out.order = order;
  if (order < 1 || tokens.size() < static_cast<std::size_t>(order)) return out;
  const std::size_t n = static_cast<std::size_t>(order);
  std::string key;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    key.clear();
    for (std::size_t k = 0; k < n; ++k) {
      // Length-prefixed so no token content can collide with a separator.
      key.append(std::to_string(tokens[i + k].size()));
      key.push_back(':');
      key.append(tokens[i + k]);
    }
    ++out.counts[key];
    ++out.total;
  }
  return out;
}

NGramCounts char_ngrams(std::u32string_view chars, int order) {
  NGramCounts out;
  out.order = order;
  if (order < 1 || chars.size() < static_cast<std::size_t>(order)) return out;
  const std::size_t n = static_cast<std::size_t>(order);
  for (std::size_t i = 0; i + n <= chars.size(); ++i) {
    ++out.counts[text::to_utf8(chars.substr(i, n))];
    ++out.total;
  }
  return out;
}

std::size_t clipped_matches(const NGramCounts& hyp, const NGramCounts& ref) {
  std::size_t matches = 0;
  for (const auto& [gram, count] : hyp.counts) {
    auto it = ref.counts.find(gram);
    if (it != ref.counts.end()) matches += std::min(count, it->second);
  }
  return matches;
}

// ---------------------------------------------------------------------------
// BLEU

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.matches.size() != matches.size()) {
    throw InvalidArgument("BLEU statistics with different max orders");
  }
  for (std::size_t n = 0; n < matches.size(); ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

BleuStats bleu_stats(std::span<const std::string> hyp, std::span<const std::string> ref,
                     int max_order) {
  if (max_order < 1) throw InvalidArgument("BLEU max order must be >= 1");
  BleuStats stats(max_order);
  stats.hyp_length = hyp.size();
  stats.ref_length = ref.size();
  for (int n = 1; n <= max_order; ++n) {
    const auto h = word_ngrams(hyp, n);
    const auto r = word_ngrams(ref, n);
    stats.totals[n - 1] = h.total;
    stats.matches[n - 1] = clipped_matches(h, r);
  }
  return stats;
}

double brevity_penalty(std::size_t hyp_length, std::size_t ref_length) {
  if (hyp_length == 0) return 0.0;
  if (hyp_length > ref_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
}

MetricScore bleu_from_stats(const BleuStats& stats, const BleuOptions& options) {
  MetricScore score;
  score.metric = Metric::kBleu;
  const int max_order = static_cast<int>(stats.matches.size());
  const double bp = brevity_penalty(stats.hyp_length, stats.ref_length);
  score.components["BP"] = bp;
  score.components["c"] = static_cast<double>(stats.hyp_length);
  score.components["r"] = static_cast<double>(stats.ref_length);
  score.components["N"] = max_order;

  double log_sum = 0.0;
  int effective = 0;
  bool zero_precision = false;
  for (int n = 0; n < max_order; ++n) {
    const std::string key = "p" + std::to_string(n + 1);
    if (stats.totals[n] == 0) {
      score.components[key] = 0.0;
      continue;
    }
    double p = static_cast<double>(stats.matches[n]) / static_cast<double>(stats.totals[n]);
    if (stats.matches[n] == 0 && options.smooth) {
      p = options.epsilon / static_cast<double>(stats.totals[n]);
    }
    score.components[key] = p;
    ++effective;
    if (p <= 0.0) {
      zero_precision = true;
    } else {
      log_sum += std::log(p);
    }
  }
  if (stats.hyp_length == 0) {
    score.flags.emplace_back("empty_hypothesis");
    score.value = 0.0;
    return score;
  }
  if (effective < max_order) score.flags.emplace_back("reduced_order");
  if (options.smooth) score.flags.emplace_back("smoothed");
  if (zero_precision || effective == 0) {
    score.value = 0.0;
    return score;
  }
  score.value = 100.0 * bp * std::exp(log_sum / effective);
  score.value = std::clamp(score.value, 0.0, 100.0);
  return score;
}

MetricScore bleu_corpus(std::span<const TokenizedSegment> hyps, std::span<const TokenizedSegment> refs,
                        const BleuOptions& options) {
  if (hyps.size() != refs.size() || hyps.empty()) {
    throw InvalidArgument("bleu_corpus needs equally sized, non-empty hypothesis and reference lists");
  }
  BleuStats total(options.max_order);
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    total += bleu_stats(hyps[i].tokens, refs[i].tokens, options.max_order);
  }
  return bleu_from_stats(total, options);
}

MetricScore bleu_sentence(const TokenizedSegment& hyp, const TokenizedSegment& ref,
                          const BleuOptions& options) {
  return bleu_from_stats(bleu_stats(hyp.tokens, ref.tokens, options.max_order), options);
}

// ---------------------------------------------------------------------------
// chrF++

ChrfStats& ChrfStats::operator+=(const ChrfStats& other) {
  if (orders.empty()) orders.resize(other.orders.size());
  if (other.orders.size() != orders.size()) {
    throw InvalidArgument("chrF statistics with different orders");
  }
  for (std::size_t i = 0; i < orders.size(); ++i) {
    orders[i].hyp += other.orders[i].hyp;
    orders[i].ref += other.orders[i].ref;
    orders[i].match += other.orders[i].match;
  }
  return *this;
}

ChrfStats chrf_stats(std::string_view hyp, std::string_view ref, const ChrfOptions& options) {
  const TokenizeOptions tok{options.lowercase};
  ChrfStats stats;
  const auto hc = tokenize(hyp, TokenMode::kChar, tok);
  const auto rc = tokenize(ref, TokenMode::kChar, tok);
  for (int n = 1; n <= options.char_order; ++n) {
    const auto h = char_ngrams(hc.chars, n);
    const auto r = char_ngrams(rc.chars, n);
    stats.orders.push_back({h.total, r.total, clipped_matches(h, r)});
  }
  const auto hw = word_tokens(hyp, tok);
  const auto rw = word_tokens(ref, tok);
  for (int n = 1; n <= options.word_order; ++n) {
    const auto h = word_ngrams(hw, n);
    const auto r = word_ngrams(rw, n);
    stats.orders.push_back({h.total, r.total, clipped_matches(h, r)});
  }
  return stats;
}

MetricScore chrf_from_stats(const ChrfStats& stats, const ChrfOptions& options) {
  MetricScore score;
  score.metric = Metric::kChrfpp;
  score.components["beta"] = options.beta;

  std::size_t hyp_total = 0;
  std::size_t ref_total = 0;
  double p_sum = 0.0;
  double r_sum = 0.0;
  int effective = 0;
  for (const auto& o : stats.orders) {
    hyp_total += o.hyp;
    ref_total += o.ref;
    if (o.hyp == 0 && o.ref == 0) continue;
    ++effective;
    if (o.hyp > 0) p_sum += static_cast<double>(o.match) / static_cast<double>(o.hyp);
    if (o.ref > 0) r_sum += static_cast<double>(o.match) / static_cast<double>(o.ref);
  }
  if (hyp_total == 0 && ref_total == 0) {
    score.flags.emplace_back("both_empty");
    score.components["P"] = 1.0;
    score.components["R"] = 1.0;
    score.value = 100.0;
    return score;
  }
  if (hyp_total == 0) score.flags.emplace_back("empty_hypothesis");
  if (ref_total == 0) score.flags.emplace_back("empty_reference");
  const double p = effective ? p_sum / effective : 0.0;
  const double r = effective ? r_sum / effective : 0.0;
  score.components["P"] = p;
  score.components["R"] = r;
  const double b2 = options.beta * options.beta;
  const double denom = b2 * p + r;
  const double f = denom > 0.0 ? (1.0 + b2) * p * r / denom : 0.0;
  score.value = std::clamp(100.0 * f, 0.0, 100.0);
  return score;
}

MetricScore chrf_pp(std::string_view hyp, std::string_view ref, const ChrfOptions& options) {
  return chrf_from_stats(chrf_stats(hyp, ref, options), options);
}

MetricScore chrf_pp_corpus(std::span<const std::string> hyps, std::span<const std::string> refs,
                           const ChrfOptions& options) {
  if (hyps.size() != refs.size() || hyps.empty()) {
    throw InvalidArgument("chrf_pp_corpus needs equally sized, non-empty lists");
  }
  ChrfStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += chrf_stats(hyps[i], refs[i], options);
  return chrf_from_stats(total, options);
}

// ---------------------------------------------------------------------------
// ROUGE-L

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

namespace {

// Indices into `ref` lying on one LCS path with `hyp`.
std::vector<std::size_t> lcs_indices(std::span<const std::string> ref,
                                     std::span<const std::string> hyp) {
  const std::size_t m = ref.size();
  const std::size_t n = hyp.size();
  std::vector<std::size_t> table((m + 1) * (n + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return table[i * (n + 1) + j]; };
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      at(i, j) = ref[i - 1] == hyp[j - 1] ? at(i - 1, j - 1) + 1
                                           : std::max(at(i - 1, j), at(i, j - 1));
    }
  }
  std::vector<std::size_t> out;
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 && j > 0) {
    if (ref[i - 1] == hyp[j - 1]) {
      out.push_back(i - 1);
      --i;
      --j;
    } else if (at(i - 1, j) >= at(i, j - 1)) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::span<const std::string>> blocks_of(const TokenizedSegment& seg) {
  std::vector<std::span<const std::string>> blocks;
  std::size_t begin = 0;
  const std::span<const std::string> all(seg.tokens);
  for (std::size_t end : seg.block_ends) {
    if (end > begin) blocks.push_back(all.subspan(begin, end - begin));
    begin = end;
  }
  if (begin < all.size()) blocks.push_back(all.subspan(begin));
  return blocks;
}

}  // namespace

MetricScore rouge_l_sum(const TokenizedSegment& hyp, const TokenizedSegment& ref) {
  MetricScore score;
  score.metric = Metric::kRougeLSum;
  score.components["R_lcs"] = 0.0;
  score.components["P_lcs"] = 0.0;
  score.components["F_lcs"] = 0.0;
  score.components["lcs"] = 0.0;
  if (hyp.tokens.empty() || ref.tokens.empty()) {
    score.flags.emplace_back(hyp.tokens.empty() ? "empty_hypothesis" : "empty_reference");
    return score;
  }

  std::unordered_map<std::string, std::size_t> hyp_counts;
  std::unordered_map<std::string, std::size_t> ref_counts;
  for (const auto& t : hyp.tokens) ++hyp_counts[t];
  for (const auto& t : ref.tokens) ++ref_counts[t];

  const auto hyp_blocks = blocks_of(hyp);
  std::size_t hits = 0;
  for (const auto& ref_block : blocks_of(ref)) {
    std::set<std::size_t> union_idx;
    for (const auto& hyp_block : hyp_blocks) {
      for (std::size_t idx : lcs_indices(ref_block, hyp_block)) union_idx.insert(idx);
    }
    // Each token is credited at most as often as it occurs on both sides.
    for (std::size_t idx : union_idx) {
      const std::string& tok = ref_block[idx];
      auto h = hyp_counts.find(tok);
      auto r = ref_counts.find(tok);
      if (h != hyp_counts.end() && r != ref_counts.end() && h->second > 0 && r->second > 0) {
        ++hits;
        --h->second;
        --r->second;
      }
    }
  }
  const double recall = static_cast<double>(hits) / static_cast<double>(ref.tokens.size());
  const double precision = static_cast<double>(hits) / static_cast<double>(hyp.tokens.size());
  const double f = recall + precision > 0.0 ? 2.0 * recall * precision / (recall + precision) : 0.0;
  score.components["R_lcs"] = recall;
  score.components["P_lcs"] = precision;
  score.components["F_lcs"] = f;
  score.components["lcs"] = static_cast<double>(hits);
  score.value = f;
  return score;
}

MetricScore rouge_l_sum(std::string_view hyp, std::string_view ref, const TokenizeOptions& options) {
  return rouge_l_sum(tokenize(hyp, TokenMode::kWord, options), tokenize(ref, TokenMode::kWord, options));
}

// ---------------------------------------------------------------------------
// BERTScore

SimilarityMatrix::SimilarityMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

SimilarityMatrix SimilarityMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  SimilarityMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw InvalidArgument("similarity matrix rows differ in length");
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

SimilarityMatrix SimilarityMatrix::transposed() const {
  SimilarityMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  }
  return t;
}

MetricScore bertscore_from_similarity(const SimilarityMatrix& sim) {
  if (sim.rows() == 0 || sim.cols() == 0) throw InvalidArgument("empty similarity matrix");
  double recall = 0.0;
  for (std::size_t i = 0; i < sim.rows(); ++i) {
    double best = sim.at(i, 0);
    for (std::size_t j = 1; j < sim.cols(); ++j) best = std::max(best, sim.at(i, j));
    recall += best;
  }
  recall /= static_cast<double>(sim.rows());
  double precision = 0.0;
  for (std::size_t j = 0; j < sim.cols(); ++j) {
    double best = sim.at(0, j);
    for (std::size_t i = 1; i < sim.rows(); ++i) best = std::max(best, sim.at(i, j));
    precision += best;
  }
  precision /= static_cast<double>(sim.cols());
  const double denom = precision + recall;
  const double f = denom != 0.0 ? 2.0 * precision * recall / denom : 0.0;

  MetricScore score;
  score.metric = Metric::kBertScore;
  score.components["P_BERT"] = precision;
  score.components["R_BERT"] = recall;
  score.components["F_BERT"] = f;
  score.value = f;
  return score;
}

}  // namespace medxlate::metrics
