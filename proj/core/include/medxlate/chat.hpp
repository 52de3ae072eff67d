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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace medxlate::chat {

struct Message {
  std::string role;
  std::string content;

  bool operator==(const Message&) const = default;
};

// One chat-completion call. `task` and `fields` describe the request in
// structured form; HTTP backends ignore them, stub backends answer from them.
struct Request {
  std::vector<Message> messages;
  double temperature = 0.0;
  std::string task;
  std::map<std::string, std::string> fields;
};

struct Response {
  std::string text;
};

// Implementations must be safe to call from several threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual Response complete(const Request& request) = 0;
  virtual std::string model_name() const = 0;
};

class FunctionBackend : public Backend {
 public:
  using Handler = std::function<Response(const Request&)>;

  FunctionBackend(std::string model_name, Handler handler)
      : model_name_(std::move(model_name)), handler_(std::move(handler)) {}

  Response complete(const Request& request) override { return handler_(request); }
  std::string model_name() const override { return model_name_; }

 private:
  std::string model_name_;
  Handler handler_;
};

struct RetryPolicy {
  int max_attempts = 3;
  double backoff_base_s = 1.0;
  double backoff_factor = 2.0;

  // Delay before retry number `retry` (1-based).
  double delay_s(int retry) const;
};

using Sleeper = std::function<void(double seconds)>;

Sleeper real_sleeper();

// Retries TransportError only; the final TransportError names the attempt
// count. `attempts` receives the number of calls made, also on failure.
Response complete_with_retries(Backend& backend, const Request& request, const RetryPolicy& policy,
                               const Sleeper& sleeper, int* attempts = nullptr);

enum class EndpointKind { kOpenAi, kStub };

struct EndpointConfig {
  std::string name;
  EndpointKind kind = EndpointKind::kOpenAi;
  std::string model;        // model identifier sent on the wire; defaults to name
  std::string base_url;     // e.g. https://api.example.com/v1
  std::string api_key_env;  // environment variable holding the bearer token
  double timeout_s = 60.0;
  int max_concurrent = 4;
  std::optional<int> max_tokens;
  RetryPolicy retry;
  // Stub endpoints.
  std::filesystem::path stub_lexicon;
  double stub_recall = 0.5;
  double stub_noise = 0.3;

  void validate() const;  // throws ConfigError
};

// `base_dir` resolves a relative stub lexicon path.
EndpointConfig endpoint_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json endpoint_to_json(const EndpointConfig& config);

// OpenAI-compatible chat completions over HTTP(S).
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(EndpointConfig config);

  Response complete(const Request& request) override;
  std::string model_name() const override { return config_.name; }

 private:
  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

std::unique_ptr<Backend> make_backend(const EndpointConfig& config);

}  // namespace medxlate::chat
