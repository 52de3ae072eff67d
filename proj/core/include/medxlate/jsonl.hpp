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

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace medxlate::jsonl {

using Json = nlohmann::json;

// Calls `fn(record, line_number)` for every non-blank line. Parse failures
// throw SchemaError naming the file and line.
void for_each(const std::filesystem::path& path,
              const std::function<void(const Json&, std::size_t)>& fn);

// Writes `content` to `path` via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Compact single-line serialization with sorted keys.
std::string dump_line(const Json& record);

}  // namespace medxlate::jsonl
