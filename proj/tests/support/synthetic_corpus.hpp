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

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace testing_support {

// A synthetic article pair where every true correspondence is known.
struct SyntheticArticle {
  std::vector<std::string> source;
  std::vector<std::string> target;
  // (source index, target index) of every constructed 1-1 bead.
  std::vector<std::pair<std::size_t, std::size_t>> truth;
};

inline std::string random_word(std::mt19937_64& rng, int min_len, int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> letter(0, 25);
  std::string w;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) w.push_back(static_cast<char>('a' + letter(rng)));
  return w;
}

inline std::string random_sentence_text(std::mt19937_64& rng, int words) {
  std::string s;
  for (int i = 0; i < words; ++i) {
    if (i) s.push_back(' ');
    s += random_word(rng, 2, 9);
  }
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  s.push_back('.');
  return s;
}

// Sentence whose character length is close to `chars`.
inline std::string sentence_of_length(std::mt19937_64& rng, std::size_t chars) {
  std::string s;
  while (s.size() + 3 < chars) {
    if (!s.empty()) s.push_back(' ');
    const std::size_t room = chars - s.size() - 1;
    std::uniform_int_distribution<std::size_t> len(2, std::max<std::size_t>(2, std::min<std::size_t>(9, room)));
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + rng() % 26));
  }
  if (s.empty()) s = "ab";
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  s.push_back('.');
  return s;
}

// `sentences` true 1-1 beads; each position independently receives an
// unmatched extra sentence on one side with probability `insert_rate`.
// Target lengths track source lengths with ~10% noise.
inline SyntheticArticle make_synthetic_article(std::mt19937_64& rng, int sentences,
                                               double insert_rate) {
  SyntheticArticle a;
  std::uniform_int_distribution<int> words(4, 22);
  std::uniform_real_distribution<double> ratio(0.9, 1.1);
  std::bernoulli_distribution insert(insert_rate);
  std::bernoulli_distribution side(0.5);
  for (int i = 0; i < sentences; ++i) {
    if (insert(rng)) {
      const auto extra = random_sentence_text(rng, words(rng));
      (side(rng) ? a.source : a.target).push_back(extra);
    }
    const auto src = random_sentence_text(rng, words(rng));
    const auto target_len = static_cast<std::size_t>(static_cast<double>(src.size()) * ratio(rng));
    a.truth.emplace_back(a.source.size(), a.target.size());
    a.source.push_back(src);
    a.target.push_back(sentence_of_length(rng, target_len));
  }
  return a;
}

inline std::string join_sentences(const std::vector<std::string>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out.push_back(' ');
    out += s;
  }
  return out;
}

}  // namespace testing_support
