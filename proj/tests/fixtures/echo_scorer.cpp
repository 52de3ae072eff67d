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
// Minimal scorer sidecar for protocol tests.
//
//   --value V            score returned for every triple (default 0.5)
//   --match              score 1.0 when hyp == ref, else V
//   --capabilities a,b   advertised capabilities (default comet,bert-embed)
//   --protocol N         advertised protocol version (default 1)
//   --bad-hello          send a non-JSON handshake
//   --malformed-at K     answer request K with a non-JSON line
//   --wrong-id-at K      answer request K with a mismatched id
//   --error-at K         answer request K with an error object
//   --crash-at K         exit with status 3 on request K after writing to stderr
//   --hang-at K          never answer request K

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  double value = 0.5;
  bool match = false;
  std::vector<std::string> caps = {"comet", "bert-embed"};
  int protocol = 1;
  bool bad_hello = false;
  long malformed_at = -1, wrong_id_at = -1, error_at = -1, crash_at = -1, hang_at = -1;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&] { return i + 1 < argc ? std::string(argv[++i]) : std::string(); };
    if (a == "--value") value = std::stod(next());
    else if (a == "--match") match = true;
    else if (a == "--capabilities") caps = split(next(), ',');
    else if (a == "--protocol") protocol = std::stoi(next());
    else if (a == "--bad-hello") bad_hello = true;
    else if (a == "--malformed-at") malformed_at = std::stol(next());
    else if (a == "--wrong-id-at") wrong_id_at = std::stol(next());
    else if (a == "--error-at") error_at = std::stol(next());
    else if (a == "--crash-at") crash_at = std::stol(next());
    else if (a == "--hang-at") hang_at = std::stol(next());
  }

  if (bad_hello) {
    std::cout << "hello there" << std::endl;
  } else {
    std::cout << nlohmann::json{{"hello", {{"protocol", protocol}, {"capabilities", caps}}}}.dump() << std::endl;
  }

  long count = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto req = nlohmann::json::parse(line);
    const long id = req.at("id").get<long>();
    const std::string op = req.at("op").get<std::string>();
    if (op == "shutdown") return 0;
    ++count;
    if (count == crash_at) {
      std::cerr << "echo scorer: simulated crash on request " << id << std::endl;
      return 3;
    }
    if (count == hang_at) {
      std::this_thread::sleep_for(std::chrono::hours(1));
    }
    if (count == malformed_at) {
      std::cout << "{not json" << std::endl;
      continue;
    }
    nlohmann::json resp = {{"id", count == wrong_id_at ? id + 100 : id}};
    if (count == error_at) {
      resp["error"] = "simulated failure";
    } else if (op == "score") {
      nlohmann::json values = nlohmann::json::array();
      for (const auto& t : req.at("triples")) {
        values.push_back(match && t.at("hyp") == t.at("ref") ? 1.0 : value);
      }
      resp["value"] = values;
    } else if (op == "embed-sim") {
      const auto hyp = split(req.at("hyp").get<std::string>(), ' ');
      const auto ref = split(req.at("ref").get<std::string>(), ' ');
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : ref) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& h : hyp) row.push_back(r == h ? 1.0 : 0.0);
        rows.push_back(row);
      }
      resp["value"] = rows;
    } else {
      resp = {{"id", id}, {"error", "unknown op " + op}};
    }
    std::cout << resp.dump() << std::endl;
  }
  return 0;
}
