/*
 * Copyright 2026 The absa-annotator Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "absa/client.h"

#include <cstdlib>
#include <thread>

#include "absa/dataset_io.h"
#include "absa/digest.h"
#include "gtest/gtest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_util.h"

namespace absa {
namespace {

using json = nlohmann::json;

// Local stand-in for an OpenAI-compatible server.
class FakeServer {
 public:
  explicit FakeServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1";
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string Completion(const std::string& content) {
  return json{{"choices", {{{"message", {{"role", "assistant"},
                                         {"content", content}}}}}},
              {"usage", {{"prompt_tokens", 12}, {"completion_tokens", 3}}}}
      .dump();
}

EndpointConfig FastConfig(const std::string& url) {
  EndpointConfig config;
  config.base_url = url;
  config.initial_backoff = std::chrono::milliseconds(1);
  config.timeout = std::chrono::milliseconds(2000);
  return config;
}

GenerationRequest Request(const std::string& prompt, std::int64_t seed) {
  GenerationRequest r;
  r.prompt = prompt;
  r.seed = seed;
  r.run_seed = seed;
  return r;
}

TEST(HttpBackendTest, SendsChatCompletionAndParsesAnswer) {
  std::mutex mu;
  json seen;
  std::string auth;
  FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu);
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(Completion("[]"), "application/json");
  });
  EndpointConfig config = FastConfig(server.url());
  config.api_key = "secret";
  HttpBackend backend(config);
  const GenerationResult result = backend.Generate(Request("hello", 3));
  EXPECT_EQ(result.text, "[]");
  EXPECT_EQ(result.usage.prompt_tokens, 12);
  EXPECT_EQ(result.usage.completion_tokens, 3);
  EXPECT_GT(result.latency.count(), 0);
  EXPECT_EQ(backend.requests_sent(), 1);

  std::lock_guard lock(mu);
  EXPECT_EQ(seen["model"], "gemma3:27b");
  EXPECT_EQ(seen["messages"][0]["role"], "user");
  EXPECT_EQ(seen["messages"][0]["content"], "hello");
  EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.8);
  EXPECT_EQ(seen["stream"], false);
  EXPECT_EQ(seen["seed"], 3);
  EXPECT_EQ(auth, "Bearer secret");
}

TEST(HttpBackendTest, OmitsSeedWhenDisabled) {
  EndpointConfig config;
  config.send_seed = false;
  const json body = json::parse(ChatCompletionBody(config, Request("p", 9)));
  EXPECT_FALSE(body.contains("seed"));
}

TEST(HttpBackendTest, GivesUpAfterMaxAttemptsOfServerErrors) {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  HttpBackend backend(FastConfig(server.url()));
  try {
    backend.Generate(Request("p", 1));
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportError::Kind::kStatus);
    EXPECT_EQ(e.status(), 500);
    EXPECT_NE(std::string(e.what()).find("after 5 attempts"),
              std::string::npos);
  }
  EXPECT_EQ(hits.load(), 5);
  EXPECT_EQ(backend.requests_sent(), 5);
}

TEST(HttpBackendTest, RetriesRateLimitThenSucceeds) {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (++hits < 3) {
      res.status = 429;
      return;
    }
    res.set_content(Completion("ok"), "application/json");
  });
  HttpBackend backend(FastConfig(server.url()));
  EXPECT_EQ(backend.Generate(Request("p", 1)).text, "ok");
  EXPECT_EQ(hits.load(), 3);
}

TEST(HttpBackendTest, ClientErrorsAreNotRetried) {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 400;
  });
  HttpBackend backend(FastConfig(server.url()));
  EXPECT_THROW(backend.Generate(Request("p", 1)), TransportError);
  EXPECT_EQ(hits.load(), 1);
}

TEST(HttpBackendTest, MalformedBodyIsTransportError) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": []})", "application/json");
  });
  HttpBackend backend(FastConfig(server.url()));
  try {
    backend.Generate(Request("p", 1));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportError::Kind::kMalformedResponse);
  }
}

TEST(HttpBackendTest, SlowServerTimesOut) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    res.set_content(Completion("late"), "application/json");
  });
  EndpointConfig config = FastConfig(server.url());
  config.timeout = std::chrono::milliseconds(100);
  config.max_attempts = 2;
  HttpBackend backend(config);
  try {
    backend.Generate(Request("p", 1));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportError::Kind::kTimeout);
  }
  EXPECT_EQ(backend.requests_sent(), 2);
}

TEST(HttpBackendTest, UnreachableEndpointIsNetworkError) {
  EndpointConfig config = FastConfig("http://127.0.0.1:1/v1");
  config.max_attempts = 2;
  HttpBackend backend(config);
  try {
    backend.Generate(Request("p", 1));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.kind(), TransportError::Kind::kNetwork);
  }
}

TEST(EndpointConfigTest, ValidatesAndDigestsWithoutKey) {
  EndpointConfig a;
  EndpointConfig b = a;
  b.api_key = "different";
  EXPECT_EQ(a.Digest(), b.Digest());
  b.temperature = 0.0;
  EXPECT_NE(a.Digest(), b.Digest());
  EndpointConfig bad;
  bad.max_attempts = 0;
  EXPECT_THROW(bad.Validate(), UsageError);
  bad = a;
  bad.temperature = -1;
  EXPECT_THROW(bad.Validate(), UsageError);
  EXPECT_THROW(HttpBackend(FastConfig("localhost:8080")), UsageError);
}

TEST(CassetteTest, SaveLoadAndReplay) {
  testing::TempDir dir;
  auto cassette = std::make_shared<Cassette>();
  cassette->Add({Sha256Hex("prompt b"), 2, "B2", {}});
  cassette->Add({Sha256Hex("prompt a"), 1, "A1", {7, 1}});
  cassette->Add({Sha256Hex("prompt a"), 1, "A1 again", {}});
  EXPECT_EQ(cassette->size(), 2u);
  cassette->Save(dir / "c.jsonl");
  const std::string saved = ReadFile(dir / "c.jsonl");
  Cassette::Load(dir / "c.jsonl").Save(dir / "c2.jsonl");
  EXPECT_EQ(ReadFile(dir / "c2.jsonl"), saved);

  ReplayBackend replay(
      std::make_shared<Cassette>(Cassette::Load(dir / "c.jsonl")));
  EXPECT_EQ(replay.Generate(Request("prompt a", 1)).text, "A1 again");
  EXPECT_EQ(replay.Generate(Request("prompt b", 2)).text, "B2");
  EXPECT_THROW(replay.Generate(Request("prompt a", 2)), MissingEntryError);
  EXPECT_THROW(replay.Generate(Request("prompt c", 1)), MissingEntryError);
}

TEST(CassetteTest, RecordingBackendCapturesEveryAnswer) {
  testing::TempDir dir;
  ScriptedBackend script;
  script.SetDefault({{"[]", false}});
  RecordCassette(script, {"p1", "p2"}, {1, 2, 3}, dir / "rec.jsonl");
  const Cassette loaded = Cassette::Load(dir / "rec.jsonl");
  EXPECT_EQ(loaded.size(), 6u);
  EXPECT_EQ(loaded.Find(Sha256Hex("p2"), 3)->response, "[]");
}

TEST(ScriptedBackendTest, PlaysSequencesPerKeyAndRepeatsLast) {
  ScriptedBackend script;
  script.ScriptTexts("s", 1, {"a", "b"});
  auto at = [&](int attempt) {
    GenerationRequest r = Request("p", 99);
    r.tag = "s";
    r.run_seed = 1;
    r.attempt = attempt;
    return script.Generate(r).text;
  };
  EXPECT_EQ(at(1), "a");
  EXPECT_EQ(at(2), "b");
  EXPECT_EQ(at(7), "b");
  EXPECT_EQ(script.calls(), 3);
  EXPECT_EQ(script.calls_for("s", 1), 3);
  GenerationRequest other = Request("p", 1);
  other.tag = "unknown";
  EXPECT_THROW(script.Generate(other), MissingEntryError);
}

TEST(ScriptedBackendTest, LoadsScriptFileWithTransportFailures) {
  testing::TempDir dir;
  WriteFileAtomic(dir / "s.json", R"({
    "latency_ms": 0,
    "default": ["[]"],
    "entries": [{"sentence": "x", "seed": 2,
                 "responses": [{"transport_error": "boom"}, "ok"]}]})");
  auto script = ScriptedBackend::Load(dir / "s.json");
  GenerationRequest r = Request("p", 2);
  r.tag = "x";
  EXPECT_THROW(script->Generate(r), TransportError);
  r.attempt = 2;
  EXPECT_EQ(script->Generate(r).text, "ok");
  r.tag = "y";
  EXPECT_EQ(script->Generate(r).text, "[]");
}

// Talks to a real endpoint when ABSA_LIVE_ENDPOINT is set.
TEST(LiveEndpointTest, AnswersOnePrompt) {
  const char* url = std::getenv("ABSA_LIVE_ENDPOINT");
  if (url == nullptr || *url == '\0') {
    GTEST_SKIP() << "set ABSA_LIVE_ENDPOINT to run against a live server";
  }
  EndpointConfig config;
  config.base_url = url;
  if (const char* model = std::getenv("ABSA_MODEL")) config.model = model;
  const GenerationResult result = Generate(config, "Reply with the word ok.");
  EXPECT_FALSE(result.text.empty());
}

}  // namespace
}  // namespace absa
