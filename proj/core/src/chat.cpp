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

#include "medxlate/chat.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "medxlate/error.hpp"
#include "medxlate/stub.hpp"

namespace medxlate::chat {

using Json = nlohmann::json;

double RetryPolicy::delay_s(int retry) const {
  return backoff_base_s * std::pow(backoff_factor, std::max(0, retry - 1));
}

Sleeper real_sleeper() {
  return [](double seconds) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  };
}

Response complete_with_retries(Backend& backend, const Request& request, const RetryPolicy& policy,
                               const Sleeper& sleeper, int* attempts) {
  const int max_attempts = std::max(1, policy.max_attempts);
  for (int attempt = 1;; ++attempt) {
    if (attempts) *attempts = attempt;
    try {
      return backend.complete(request);
    } catch (const TransportError& e) {
      if (attempt >= max_attempts) {
        throw TransportError(backend.model_name() + ": giving up after " + std::to_string(attempt) +
                             " attempts: " + e.what());
      }
      if (sleeper) sleeper(policy.delay_s(attempt));
    }
  }
}

void EndpointConfig::validate() const {
  if (name.empty()) throw ConfigError("endpoint name is empty");
  if (max_concurrent < 1) throw ConfigError("endpoint '" + name + "': max_concurrent must be >= 1");
  if (!(timeout_s > 0)) throw ConfigError("endpoint '" + name + "': timeout must be > 0");
  if (retry.max_attempts < 1) throw ConfigError("endpoint '" + name + "': max_attempts must be >= 1");
  if (retry.backoff_base_s < 0 || retry.backoff_factor < 1) {
    throw ConfigError("endpoint '" + name + "': invalid backoff");
  }
  if (kind == EndpointKind::kOpenAi && base_url.empty()) {
    throw ConfigError("endpoint '" + name + "': base_url is required");
  }
  if (kind == EndpointKind::kStub && stub_lexicon.empty()) {
    throw ConfigError("endpoint '" + name + "': stub endpoints need a lexicon");
  }
}

EndpointConfig endpoint_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("endpoint must be a JSON object");
  for (const char* secret : {"api_key", "token", "password"}) {
    if (j.contains(secret)) {
      throw ConfigError(std::string("endpoint field '") + secret +
                        "' is not allowed; name an environment variable with api_key_env");
    }
  }
  EndpointConfig c;
  try {
    c.name = j.at("name").get<std::string>();
    const std::string kind = j.value("kind", "openai");
    if (kind == "openai") {
      c.kind = EndpointKind::kOpenAi;
    } else if (kind == "stub") {
      c.kind = EndpointKind::kStub;
    } else {
      throw ConfigError("endpoint '" + c.name + "': unknown kind '" + kind + "'");
    }
    c.model = j.value("model", c.name);
    c.base_url = j.value("base_url", "");
    c.api_key_env = j.value("api_key_env", "");
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.max_concurrent = j.value("max_concurrent", c.max_concurrent);
    if (j.contains("max_tokens")) c.max_tokens = j.at("max_tokens").get<int>();
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.backoff_base_s = r.value("backoff_base_s", c.retry.backoff_base_s);
      c.retry.backoff_factor = r.value("backoff_factor", c.retry.backoff_factor);
    }
    if (j.contains("stub")) {
      const auto& s = j.at("stub");
      std::filesystem::path lex = s.at("lexicon").get<std::string>();
      c.stub_lexicon = lex.is_relative() && !base_dir.empty() ? base_dir / lex : lex;
      c.stub_recall = s.value("recall", c.stub_recall);
      c.stub_noise = s.value("noise", c.stub_noise);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid endpoint: ") + e.what());
  }
  c.validate();
  return c;
}

Json endpoint_to_json(const EndpointConfig& c) {
  Json j = {{"name", c.name},
            {"kind", c.kind == EndpointKind::kStub ? "stub" : "openai"},
            {"model", c.model},
            {"timeout_s", c.timeout_s},
            {"max_concurrent", c.max_concurrent},
            {"retry",
             {{"max_attempts", c.retry.max_attempts},
              {"backoff_base_s", c.retry.backoff_base_s},
              {"backoff_factor", c.retry.backoff_factor}}}};
  if (!c.base_url.empty()) j["base_url"] = c.base_url;
  if (!c.api_key_env.empty()) j["api_key_env"] = c.api_key_env;
  if (c.max_tokens) j["max_tokens"] = *c.max_tokens;
  if (c.kind == EndpointKind::kStub) {
    j["stub"] = {{"lexicon", c.stub_lexicon.string()},
                 {"recall", c.stub_recall},
                 {"noise", c.stub_noise}};
  }
  return j;
}

HttpBackend::HttpBackend(EndpointConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::string& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint '" + config_.name + "': base_url needs a scheme: " + url);
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_begin);
  std::string prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("endpoint '" + config_.name + "': environment variable " +
                        config_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

Response HttpBackend::complete(const Request& request) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = std::chrono::duration<double>(config_.timeout_s);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  Json body = {{"model", config_.model}, {"temperature", request.temperature}};
  body["messages"] = Json::array();
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError(config_.name + ": request failed: " + httplib::to_string(res.error()));
  }
  const int status = res->status;
  auto tail = [&] { return res->body.substr(0, 300); };
  if (status == 401 || status == 403) {
    throw AuthError(config_.name + ": HTTP " + std::to_string(status) + ": " + tail());
  }
  if (status == 429 || status >= 500) {
    throw TransportError(config_.name + ": HTTP " + std::to_string(status) + ": " + tail());
  }
  if (status != 200) {
    throw EndpointError(config_.name + ": HTTP " + std::to_string(status) + ": " + tail());
  }
  Json reply;
  try {
    reply = Json::parse(res->body);
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (!content.is_string() || content.get<std::string>().empty()) {
      throw EndpointError(config_.name + ": empty completion");
    }
    return {content.get<std::string>()};
  } catch (const Json::exception& e) {
    throw EndpointError(config_.name + ": unexpected response shape: " + e.what());
  }
}

std::unique_ptr<Backend> make_backend(const EndpointConfig& config) {
  config.validate();
  if (config.kind == EndpointKind::kStub) {
    auto lexicon = std::make_shared<const stub::Lexicon>(stub::Lexicon::load(config.stub_lexicon));
    return std::make_unique<stub::LexiconBackend>(lexicon, config.name,
                                                  stub::StubBehavior{config.stub_recall, config.stub_noise});
  }
  return std::make_unique<HttpBackend>(config);
}

}  // namespace medxlate::chat
