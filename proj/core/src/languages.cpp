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

#include "medxlate/languages.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace medxlate::languages {

namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 24> kNames = {{
    {"ar", "Arabic"},     {"ca", "Catalan"},  {"de", "German"},    {"el", "Greek"},
    {"en", "English"},    {"es", "Spanish"},  {"eu", "Basque"},    {"fr", "French"},
    {"gl", "Galician"},   {"hi", "Hindi"},    {"it", "Italian"},   {"ja", "Japanese"},
    {"ko", "Korean"},     {"la", "Latin"},    {"nl", "Dutch"},     {"pl", "Polish"},
    {"pt", "Portuguese"}, {"ro", "Romanian"}, {"ru", "Russian"},   {"sv", "Swedish"},
    {"tr", "Turkish"},    {"uk", "Ukrainian"}, {"vi", "Vietnamese"}, {"zh", "Chinese"},
}};

}  // namespace

std::string english_name(std::string_view code) {
  const auto it = std::find_if(kNames.begin(), kNames.end(),
                               [&](const auto& entry) { return entry.first == code; });
  return std::string(it == kNames.end() ? code : it->second);
}

bool is_primary_subtag(std::string_view code) {
  if (code.size() < 2 || code.size() > 3) return false;
  return std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace medxlate::languages
