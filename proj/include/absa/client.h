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

// Chat-completion clients used by the annotator.
//
// Three backends share one interface: HttpBackend talks to an
// OpenAI-compatible /chat/completions endpoint, ReplayBackend answers from a
// recorded cassette and never touches the network, and ScriptedBackend plays
// programmed response sequences for tests. RecordingBackend wraps any of
// them and appends every answer to a cassette.

#ifndef ABSA_CLIENT_H_
#define ABSA_CLIENT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <utility>
#include <vector>

#include "absa/types.h"

namespace absa {

struct EndpointConfig {
  // Base URL up to and excluding "/chat/completions".
  std::string base_url = "http://localhost:11434/v1";
  std::string model = "gemma3:27b";
  double temperature = 0.8;
  std::int64_t seed = 1;
  // Send "seed" in the request body. Some servers reject the field.
  bool send_seed = true;
  std::chrono::milliseconds timeout{120000};
  // Transport-level attempts per request (first try included).
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  // Concurrent requests allowed against one endpoint.
  int max_in_flight = 4;
  // Never written to manifests or digests.
  std::string api_key;

  // Throws UsageError on temperature < 0, timeout <= 0, max_attempts < 1
  // or max_in_flight outside [1, 256].
  void Validate() const;

  // SHA-256 over the canonical JSON of every field except api_key.
  std::string Digest() const;
};

// Overrides base_url from ABSA_ENDPOINT_URL and api_key from ABSA_API_KEY
// when those variables are set.
EndpointConfig ApplyEndpointEnvironment(EndpointConfig config);

struct GenerationRequest {
  std::string prompt;
  // Seed sent to the endpoint and mixed into replay keys.
  std::int64_t seed = 0;
  // Scheduling-independent identity for scripted playback; not sent over
  // the wire.
  std::string tag;
  std::int64_t run_seed = 0;
  int attempt = 1;
};

struct TokenUsage {
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
};

struct GenerationResult {
  std::string text;
  std::chrono::nanoseconds latency{0};
  TokenUsage usage;
};

// Request could not be completed (distinct from invalid model content).
class TransportError : public Error {
 public:
  enum class Kind { kNetwork, kTimeout, kStatus, kMalformedResponse };

  TransportError(Kind kind, const std::string& message, int status = 0)
      : Error(message), kind_(kind), status_(status) {}

  Kind kind() const { return kind_; }
  // HTTP status for kStatus, else 0.
  int status() const { return status_; }

 private:
  Kind kind_;
  int status_;
};

// Replay or script has no answer for a request. Never falls back to a live
// call.
class MissingEntryError : public Error {
 public:
  using Error::Error;
};

class Backend {
 public:
  virtual ~Backend() = default;

  // Runs the request and stamps the wall-clock latency around it.
  GenerationResult Generate(const GenerationRequest& request);

  virtual std::string Name() const = 0;

 protected:
  virtual GenerationResult DoGenerate(const GenerationRequest& request) = 0;
};

// One-shot "generate" as a free function over an endpoint config.
GenerationResult Generate(const EndpointConfig& config,
                          const std::string& prompt);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(EndpointConfig config);

  std::string Name() const override { return "http"; }
  const EndpointConfig& config() const { return config_; }

  // Number of HTTP requests sent, retries included.
  std::int64_t requests_sent() const { return requests_sent_.load(); }

 protected:
  GenerationResult DoGenerate(const GenerationRequest& request) override;

 private:
  GenerationResult SendOnce(const GenerationRequest& request);

  EndpointConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<256> in_flight_;
  std::atomic<std::int64_t> requests_sent_{0};
};

// Builds the JSON body sent to /chat/completions.
std::string ChatCompletionBody(const EndpointConfig& config,
                               const GenerationRequest& request);

struct CassetteEntry {
  std::string digest;
  std::int64_t seed = 0;
  std::string response;
  TokenUsage usage;
};

// Mapping (SHA-256 of prompt, seed) -> response. Stored as JSON Lines of
// {"digest": hex, "seed": int, "response": text, "usage": {...}}, sorted by
// (digest, seed) on save. Thread-safe.
class Cassette {
 public:
  Cassette() = default;
  Cassette(Cassette&& other) noexcept : entries_(std::move(other.entries_)) {}
  Cassette& operator=(Cassette&&) = delete;

  static Cassette Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

  // Later entries for the same key replace earlier ones.
  void Add(CassetteEntry entry);
  std::optional<CassetteEntry> Find(const std::string& digest,
                                    std::int64_t seed) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::int64_t>, CassetteEntry> entries_;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<const Cassette> cassette)
      : cassette_(std::move(cassette)) {}

  std::string Name() const override { return "replay"; }

 protected:
  GenerationResult DoGenerate(const GenerationRequest& request) override;

 private:
  std::shared_ptr<const Cassette> cassette_;
};

// Programmed responses keyed by (tag, run_seed); attempt n receives the
// n-th response of its sequence, and attempts past the end repeat the last
// one. A response may instead be a scripted transport failure.
class ScriptedBackend : public Backend {
 public:
  struct Step {
    std::string text;
    bool transport_failure = false;
  };

  ScriptedBackend() = default;

  // Script file:
  //   {"latency_ms": 0, "default": ["[]"],
  //    "entries": [{"sentence": s, "seed": 1,
  //                 "responses": ["...", {"transport_error": "msg"}]}]}
  // "default" (optional) answers keys without an entry.
  static std::unique_ptr<ScriptedBackend> Load(
      const std::filesystem::path& path);

  void Script(const std::string& tag, std::int64_t run_seed,
              std::vector<Step> steps);
  void ScriptTexts(const std::string& tag, std::int64_t run_seed,
                   const std::vector<std::string>& texts);
  void SetDefault(std::vector<Step> steps) { default_ = std::move(steps); }
  // Artificial per-call delay, for timing tests.
  void SetLatency(std::chrono::microseconds latency) { latency_ = latency; }

  std::string Name() const override { return "scripted"; }

  std::int64_t calls() const { return calls_.load(); }
  std::int64_t calls_for(const std::string& tag, std::int64_t run_seed) const;

 protected:
  GenerationResult DoGenerate(const GenerationRequest& request) override;

 private:
  std::map<std::pair<std::string, std::int64_t>, std::vector<Step>> scripts_;
  std::optional<std::vector<Step>> default_;
  std::chrono::microseconds latency_{0};
  std::atomic<std::int64_t> calls_{0};
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::int64_t>, std::int64_t> per_key_calls_;
};

// Forwards to `inner` and adds every successful answer to `sink`.
class RecordingBackend : public Backend {
 public:
  RecordingBackend(Backend& inner, Cassette& sink)
      : inner_(inner), sink_(sink) {}

  std::string Name() const override { return inner_.Name() + "+record"; }

 protected:
  GenerationResult DoGenerate(const GenerationRequest& request) override;

 private:
  Backend& inner_;
  Cassette& sink_;
};

// Calls `backend` once per (prompt, seed) and saves the answers as a
// cassette at `path`.
void RecordCassette(Backend& backend, const std::vector<std::string>& prompts,
                    const std::vector<std::int64_t>& seeds,
                    const std::filesystem::path& path);
void RecordCassette(const EndpointConfig& config,
                    const std::vector<std::string>& prompts,
                    const std::filesystem::path& path);

}  // namespace absa

#endif  // ABSA_CLIENT_H_
