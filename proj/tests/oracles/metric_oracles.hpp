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

#pragma once

// Brute-force reference scorers. They share no code with the library: n-grams
// are compared element-wise by linear scans, tokenization is a plain split on
// ASCII spaces, and LCS is found by enumerating subsequences. Inputs are
// expected to be ASCII text without punctuation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

inline std::vector<std::string> split_spaces(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <class T>
std::size_t count_occurrences(const std::vector<T>& seq, const std::vector<T>& gram) {
  std::size_t n = 0;
  if (gram.empty() || seq.size() < gram.size()) return 0;
  for (std::size_t i = 0; i + gram.size() <= seq.size(); ++i) {
    bool eq = true;
    for (std::size_t k = 0; k < gram.size(); ++k) {
      if (!(seq[i + k] == gram[k])) {
        eq = false;
        break;
      }
    }
    if (eq) ++n;
  }
  return n;
}

struct OrderCounts {
  std::size_t hyp = 0;
  std::size_t ref = 0;
  std::size_t match = 0;
};

// Clipped matches at order n, enumerating each distinct hypothesis n-gram.
template <class T>
OrderCounts order_counts(const std::vector<T>& hyp, const std::vector<T>& ref, std::size_t n) {
  OrderCounts c;
  c.hyp = hyp.size() >= n ? hyp.size() - n + 1 : 0;
  c.ref = ref.size() >= n ? ref.size() - n + 1 : 0;
  std::vector<std::vector<T>> seen;
  for (std::size_t i = 0; i + n <= hyp.size(); ++i) {
    std::vector<T> gram(hyp.begin() + i, hyp.begin() + i + n);
    if (std::find(seen.begin(), seen.end(), gram) != seen.end()) continue;
    seen.push_back(gram);
    c.match += std::min(count_occurrences(hyp, gram), count_occurrences(ref, gram));
  }
  return c;
}

// Corpus BLEU over whitespace-tokenized segments, 0..100. Orders with no
// hypothesis n-grams are left out of the geometric mean.
inline double bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                   std::size_t max_order = 4) {
  std::vector<OrderCounts> totals(max_order);
  std::size_t c = 0;
  std::size_t r = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const auto h = split_spaces(hyps[s]);
    const auto g = split_spaces(refs[s]);
    c += h.size();
    r += g.size();
    for (std::size_t n = 1; n <= max_order; ++n) {
      const auto oc = order_counts(h, g, n);
      totals[n - 1].hyp += oc.hyp;
      totals[n - 1].match += oc.match;
    }
  }
  if (c == 0) return 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (const auto& t : totals) {
    if (t.hyp == 0) continue;
    if (t.match == 0) return 0.0;
    log_sum += std::log(static_cast<double>(t.match) / static_cast<double>(t.hyp));
    ++orders;
  }
  if (orders == 0) return 0.0;
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return 100.0 * bp * std::exp(log_sum / orders);
}

inline std::vector<char> chars_without_spaces(const std::string& s) {
  std::vector<char> out;
  for (char c : s) {
    if (c != ' ') out.push_back(c);
  }
  return out;
}

// chrF++ (char orders 1..char_order, word orders 1..word_order), 0..100.
// P and R are averaged over the orders that have n-grams on either side.
inline double chrf(const std::string& hyp, const std::string& ref, std::size_t char_order = 6,
                   std::size_t word_order = 2, double beta = 2.0) {
  std::vector<OrderCounts> orders;
  const auto hc = chars_without_spaces(hyp);
  const auto rc = chars_without_spaces(ref);
  for (std::size_t n = 1; n <= char_order; ++n) orders.push_back(order_counts(hc, rc, n));
  const auto hw = split_spaces(hyp);
  const auto rw = split_spaces(ref);
  for (std::size_t n = 1; n <= word_order; ++n) orders.push_back(order_counts(hw, rw, n));

  std::size_t hyp_total = 0;
  std::size_t ref_total = 0;
  double p = 0.0;
  double r = 0.0;
  int effective = 0;
  for (const auto& o : orders) {
    hyp_total += o.hyp;
    ref_total += o.ref;
    if (o.hyp == 0 && o.ref == 0) continue;
    ++effective;
    if (o.hyp) p += static_cast<double>(o.match) / static_cast<double>(o.hyp);
    if (o.ref) r += static_cast<double>(o.match) / static_cast<double>(o.ref);
  }
  if (hyp_total == 0 && ref_total == 0) return 100.0;
  p /= effective;
  r /= effective;
  const double b2 = beta * beta;
  if (b2 * p + r == 0.0) return 0.0;
  return 100.0 * (1.0 + b2) * p * r / (b2 * p + r);
}

inline bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i) {
    if (of[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

// Longest common subsequence by enumerating every subsequence of `a`.
inline std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  const std::uint32_t limit = 1u << a.size();
  for (std::uint32_t mask = 0; mask < limit; ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

// ROUGE-L F for single-block inputs.
inline double rouge_l_f(const std::string& hyp, const std::string& ref) {
  const auto h = split_spaces(hyp);
  const auto r = split_spaces(ref);
  if (h.empty() || r.empty()) return 0.0;
  const double l = static_cast<double>(lcs(r, h));
  const double rec = l / static_cast<double>(r.size());
  const double prec = l / static_cast<double>(h.size());
  return rec + prec > 0 ? 2 * rec * prec / (rec + prec) : 0.0;
}

}  // namespace oracle
