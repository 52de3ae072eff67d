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

#include <string>
#include <string_view>

namespace medxlate::languages {

// English display name for an ISO 639-1 code; the code itself when unknown.
std::string english_name(std::string_view code);

// True for a 2-3 letter lowercase primary language subtag.
bool is_primary_subtag(std::string_view code);

}  // namespace medxlate::languages
