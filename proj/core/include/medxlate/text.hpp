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
#include <map>
#include <string>
#include <string_view>
#include <vector>

// Unicode helpers over UTF-8 strings. Invalid byte sequences are replaced
// with U+FFFD on decode.
namespace medxlate::text {

std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view codepoints);
void append_utf8(std::string& out, char32_t cp);

// Canonical composition (NFC).
std::string nfc(std::string_view utf8);

// Locale-independent full lowercase mapping.
std::string lowercase(std::string_view utf8);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
bool is_alnum(char32_t cp);

std::size_t codepoint_count(std::string_view utf8);

// Splits on runs of Unicode whitespace; no empty pieces.
std::vector<std::string> split_whitespace(std::string_view utf8);

// Collapses every run of Unicode whitespace to one ASCII space and trims.
std::string collapse_whitespace(std::string_view utf8);

std::string trim(std::string_view s);

// Lowercase, NFC, trimmed, inner whitespace collapsed. Used for concept keys
// and dictionary matching.
std::string canonical_term(std::string_view utf8);

// canonical_term with punctuation removed and hyphens/underscores treated as
// spaces. Fallback key for dictionary lookup.
std::string loose_term(std::string_view utf8);

// Uppercases the first code point.
std::string capitalize_first(std::string_view utf8);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replaces each `{name}` whose name is a key of `vars` in a single left-to-right
// pass. Substituted values are never rescanned and other braces are kept.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view s);

}  // namespace medxlate::text
