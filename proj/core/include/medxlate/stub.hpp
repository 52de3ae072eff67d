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
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "medxlate/chat.hpp"

namespace medxlate::stub {

// Word and concept dictionaries behind the deterministic stub endpoints.
struct Lexicon {
  std::string source_lang = "en";
  std::string target_lang = "es";
  // Lowercase source word -> target word.
  std::map<std::string, std::string> general;
  // Canonical source concept -> language -> terms; the first term is the
  // translation, the rest are synonyms.
  std::map<std::string, std::map<std::string, std::vector<std::string>>> concepts;

  static Lexicon from_json(const nlohmann::json& j);
  static Lexicon load(const std::filesystem::path& path);

  // Concepts occurring in `sentence` as whole words, in order of first
  // occurrence, longest match first. Returns the surface forms.
  std::vector<std::string> find_concepts(std::string_view sentence) const;

  const std::vector<std::string>* terms(std::string_view key, std::string_view lang) const;
};

struct StubBehavior {
  // Fraction of concepts translated correctly without context.
  double recall = 0.5;
  // Per-token perturbation rate at temperature 1.
  double noise = 0.3;
};

// Answers knowledge-base tasks from the lexicon and translates word by word.
// A concept is translated correctly when the model "knows" it (a fixed,
// name-dependent subset of size ~recall) or when the prompt context
// mentions it. Output depends only on the request, the model name and the
// temperature.
class LexiconBackend : public chat::Backend {
 public:
  LexiconBackend(std::shared_ptr<const Lexicon> lexicon, std::string model_name,
                 StubBehavior behavior = {});

  chat::Response complete(const chat::Request& request) override;
  std::string model_name() const override { return model_name_; }

  // Deterministic translation used by the "translate" task.
  std::string translate(std::string_view sentence, std::string_view context,
                        double temperature) const;

  bool knows(std::string_view key) const;

 private:
  chat::Response answer_kb(const chat::Request& request) const;

  std::shared_ptr<const Lexicon> lexicon_;
  std::string model_name_;
  StubBehavior behavior_;
};

}  // namespace medxlate::stub
