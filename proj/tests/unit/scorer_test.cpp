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
#include <gtest/gtest.h>

#include <thread>

#include "medxlate/error.hpp"
#include "medxlate/scorer.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace medxlate;
using namespace medxlate::metrics;

const std::filesystem::path kEcho = MEDXLATE_ECHO_SCORER;

std::unique_ptr<ScorerHandle> open_echo(std::vector<std::string> args = {}, double timeout_s = 30.0) {
  ScorerOptions options;
  options.args = std::move(args);
  options.timeout_s = timeout_s;
  return ScorerHandle::open(kEcho, options);
}

std::vector<ScorerTriple> three_triples() {
  return {{"Fever.", "Fiebre.", "Fiebre."}, {"Cough.", "Tos.", "La tos."}, {"Pain.", "Dolor.", "Dolor."}};
}

template <typename E, typename F>
std::string error_of(F&& fn) {
  try {
    fn();
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected exception was not thrown";
  return {};
}

TEST(Scorer, Handshake) {
  auto handle = open_echo();
  EXPECT_EQ(handle->protocol_version(), 1);
  EXPECT_EQ(handle->capabilities(), (std::vector<std::string>{"comet", "bert-embed"}));
  EXPECT_TRUE(handle->has_capability("comet"));
  EXPECT_FALSE(handle->has_capability("ter"));
}

TEST(Scorer, EchoScoresEveryTriple) {
  auto handle = open_echo();
  EXPECT_EQ(handle->score(three_triples()), (std::vector<double>{0.5, 0.5, 0.5}));
  const auto scores = score_external(*handle, three_triples());
  ASSERT_EQ(scores.size(), 3u);
  for (const auto& s : scores) {
    EXPECT_EQ(s.metric, Metric::kExternal);
    EXPECT_DOUBLE_EQ(s.value, 0.5);
  }
}

TEST(Scorer, ScoresPassThroughInOrder) {
  auto handle = open_echo({"--match", "--value", "0.25"});
  EXPECT_EQ(handle->score(three_triples()), (std::vector<double>{1.0, 0.25, 1.0}));
}

TEST(Scorer, AbsentSidecarIsCapabilityError) {
  EXPECT_THROW(ScorerHandle::open("/nonexistent/scorer-sidecar"), CapabilityError);
  testing_support::TempDir dir;
  dir.write("not-executable", "#!/bin/sh\n");
  EXPECT_THROW(ScorerHandle::open(dir / "not-executable"), CapabilityError);
}

TEST(Scorer, MissingCapability) {
  auto handle = open_echo({"--capabilities", "bert-embed"});
  EXPECT_THROW(handle->score(three_triples()), CapabilityError);
  auto comet_only = open_echo({"--capabilities", "comet"});
  EXPECT_THROW(comet_only->embed_similarity("a", "a"), CapabilityError);
}

TEST(Scorer, MalformedResponseNamesLine) {
  auto handle = open_echo({"--malformed-at", "2"});
  EXPECT_NO_THROW(handle->score(three_triples()));
  const auto msg = error_of<ProtocolError>([&] { handle->score(three_triples()); });
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Scorer, BadHandshake) {
  const auto msg = error_of<ProtocolError>([] { open_echo({"--bad-hello"}); });
  EXPECT_NE(msg.find("line 1"), std::string::npos) << msg;
  EXPECT_THROW(open_echo({"--protocol", "2"}), ProtocolError);
}

TEST(Scorer, MismatchedIdIsProtocolError) {
  auto handle = open_echo({"--wrong-id-at", "1"});
  EXPECT_THROW(handle->score(three_triples()), ProtocolError);
}

TEST(Scorer, ReportedErrorSurfaces) {
  auto handle = open_echo({"--error-at", "1"});
  const auto msg = error_of<EndpointError>([&] { handle->score(three_triples()); });
  EXPECT_NE(msg.find("simulated failure"), std::string::npos) << msg;
  EXPECT_NO_THROW(handle->score(three_triples()));
}

TEST(Scorer, CrashReportsStatusAndStderr) {
  auto handle = open_echo({"--crash-at", "1"});
  const auto msg = error_of<ProtocolError>([&] { handle->score(three_triples()); });
  EXPECT_NE(msg.find("status 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("simulated crash"), std::string::npos) << msg;
  EXPECT_THROW(handle->score(three_triples()), ProtocolError);
}

TEST(Scorer, TimeoutIsTransportError) {
  auto handle = open_echo({"--hang-at", "1"}, 0.3);
  EXPECT_THROW(handle->score(three_triples()), TransportError);
}

TEST(Scorer, EmbedSimilarityAndBertScore) {
  auto handle = open_echo();
  const auto sim = handle->embed_similarity("a b", "a c");
  ASSERT_EQ(sim.rows(), 2u);
  ASSERT_EQ(sim.cols(), 2u);
  EXPECT_DOUBLE_EQ(sim.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(sim.at(1, 1), 0.0);
  const auto s = bertscore_external(*handle, "a b", "a c");
  EXPECT_DOUBLE_EQ(s.components.at("R_BERT"), 0.5);
  EXPECT_DOUBLE_EQ(s.components.at("P_BERT"), 0.5);
  EXPECT_DOUBLE_EQ(s.value, 0.5);
}

TEST(Scorer, ConcurrentCallersAreSerialized) {
  auto handle = open_echo({"--match", "--value", "0"});
  std::vector<std::thread> threads;
  std::atomic<int> good{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 20; ++i) {
        if (handle->score(three_triples()) == std::vector<double>{1.0, 0.0, 1.0}) ++good;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(good.load(), 80);
}

TEST(Scorer, CloseThenRequest) {
  auto handle = open_echo();
  handle->close();
  EXPECT_THROW(handle->score(three_triples()), ProtocolError);
}

}  // namespace
