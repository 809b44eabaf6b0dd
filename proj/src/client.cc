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

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "absa/dataset_io.h"
#include "absa/digest.h"
#include "httplib.h"
#include "json.hpp"

namespace absa {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::chrono::milliseconds kMaxBackoff{30000};

bool Retryable(const TransportError& e) {
  switch (e.kind()) {
    case TransportError::Kind::kNetwork:
    case TransportError::Kind::kTimeout:
      return true;
    case TransportError::Kind::kStatus:
      return e.status() == 429 || e.status() >= 500;
    case TransportError::Kind::kMalformedResponse:
      return false;
  }
  return false;
}

json UsageToJson(const TokenUsage& usage) {
  json out = json::object();
  if (usage.prompt_tokens) out["prompt_tokens"] = *usage.prompt_tokens;
  if (usage.completion_tokens) {
    out["completion_tokens"] = *usage.completion_tokens;
  }
  return out;
}

TokenUsage UsageFromJson(const json& value) {
  TokenUsage usage;
  if (!value.is_object()) return usage;
  if (value.contains("prompt_tokens") && value["prompt_tokens"].is_number()) {
    usage.prompt_tokens = value["prompt_tokens"].get<std::int64_t>();
  }
  if (value.contains("completion_tokens") &&
      value["completion_tokens"].is_number()) {
    usage.completion_tokens = value["completion_tokens"].get<std::int64_t>();
  }
  return usage;
}

// Splits "http://host:port/v1" into "http://host:port" and "/v1".
std::pair<std::string, std::string> SplitUrl(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw UsageError("endpoint URL needs a scheme: " + url);
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw UsageError("unsupported URL scheme: " + scheme);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string path = url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  return {url.substr(0, path_start), path};
}

}  // namespace

void EndpointConfig::Validate() const {
  if (!(temperature >= 0)) throw UsageError("temperature must be >= 0");
  if (timeout.count() <= 0) throw UsageError("timeout must be positive");
  if (max_attempts < 1) throw UsageError("max_attempts must be >= 1");
  if (max_in_flight < 1 || max_in_flight > 256) {
    throw UsageError("max_in_flight must be in [1, 256]");
  }
  if (initial_backoff.count() < 0) throw UsageError("negative backoff");
}

std::string EndpointConfig::Digest() const {
  json canonical = {
      {"base_url", base_url},
      {"model", model},
      {"temperature", temperature},
      {"seed", seed},
      {"send_seed", send_seed},
      {"timeout_ms", timeout.count()},
      {"max_attempts", max_attempts},
      {"initial_backoff_ms", initial_backoff.count()},
      {"max_in_flight", max_in_flight},
  };
  return Sha256Hex(canonical.dump());
}

EndpointConfig ApplyEndpointEnvironment(EndpointConfig config) {
  if (const char* url = std::getenv("ABSA_ENDPOINT_URL"); url && *url) {
    config.base_url = url;
  }
  if (const char* key = std::getenv("ABSA_API_KEY"); key && *key) {
    config.api_key = key;
  }
  return config;
}

GenerationResult Backend::Generate(const GenerationRequest& request) {
  const auto start = Clock::now();
  GenerationResult result = DoGenerate(request);
  result.latency =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

GenerationResult Generate(const EndpointConfig& config,
                          const std::string& prompt) {
  HttpBackend backend(config);
  GenerationRequest request;
  request.prompt = prompt;
  request.seed = config.seed;
  request.run_seed = config.seed;
  return backend.Generate(request);
}

std::string ChatCompletionBody(const EndpointConfig& config,
                               const GenerationRequest& request) {
  json body = {
      {"model", config.model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", config.temperature},
      {"stream", false},
  };
  if (config.send_seed) body["seed"] = request.seed;
  return body.dump();
}

HttpBackend::HttpBackend(EndpointConfig config)
    : config_(std::move(config)), in_flight_(config_.max_in_flight) {
  config_.Validate();
  std::tie(scheme_host_port_, path_) = SplitUrl(config_.base_url);
  path_ += "/chat/completions";
}

GenerationResult HttpBackend::DoGenerate(const GenerationRequest& request) {
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<256>& sem;
    ~Release() { sem.release(); }
  } release{in_flight_};

  auto backoff = config_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return SendOnce(request);
    } catch (const TransportError& e) {
      if (!Retryable(e)) throw;
      if (attempt >= config_.max_attempts) {
        throw TransportError(e.kind(),
                             std::string(e.what()) + " (after " +
                                 std::to_string(attempt) + " attempts)",
                             e.status());
      }
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::min(backoff * 2, kMaxBackoff);
  }
}

GenerationResult HttpBackend::SendOnce(const GenerationRequest& request) {
  ++requests_sent_;
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  const auto start = Clock::now();
  auto res = client.Post(path_, headers, ChatCompletionBody(config_, request),
                         "application/json");
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read &&
                            Clock::now() - start >= config_.timeout);
    throw TransportError(
        timed_out ? TransportError::Kind::kTimeout
                  : TransportError::Kind::kNetwork,
        "request to " + scheme_host_port_ + path_ +
            " failed: " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(TransportError::Kind::kStatus,
                         "endpoint returned HTTP " +
                             std::to_string(res->status),
                         res->status);
  }

  GenerationResult result;
  try {
    const json body = json::parse(res->body);
    const json& content = body.at("choices").at(0).at("message").at("content");
    result.text = content.is_string() ? content.get<std::string>() : "";
    if (body.contains("usage")) result.usage = UsageFromJson(body["usage"]);
  } catch (const json::exception& e) {
    throw TransportError(TransportError::Kind::kMalformedResponse,
                         std::string("malformed chat completion: ") + e.what());
  }
  return result;
}

Cassette Cassette::Load(const std::filesystem::path& path) {
  Cassette cassette;
  const std::string contents = ReadFile(path);
  std::size_t offset = 0;
  std::size_t line_number = 0;
  while (offset < contents.size()) {
    std::size_t end = contents.find('\n', offset);
    if (end == std::string::npos) end = contents.size();
    ++line_number;
    const std::string_view line(contents.data() + offset, end - offset);
    if (!NormalizeWhitespace(line).empty()) {
      try {
        const json value = json::parse(line);
        CassetteEntry entry;
        entry.digest = value.at("digest").get<std::string>();
        entry.seed = value.at("seed").get<std::int64_t>();
        entry.response = value.at("response").get<std::string>();
        if (value.contains("usage")) entry.usage = UsageFromJson(value["usage"]);
        cassette.Add(std::move(entry));
      } catch (const json::exception& e) {
        throw ParseError(path.string() + ": bad cassette entry: " + e.what(),
                         line_number, offset);
      }
    }
    offset = end + 1;
  }
  return cassette;
}

void Cassette::Save(const std::filesystem::path& path) const {
  std::string out;
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, entry] : entries_) {
      json line = {{"digest", entry.digest},
                   {"seed", entry.seed},
                   {"response", entry.response},
                   {"usage", UsageToJson(entry.usage)}};
      out += line.dump();
      out += '\n';
    }
  }
  WriteFileAtomic(path, out);
}

void Cassette::Add(CassetteEntry entry) {
  std::lock_guard lock(mu_);
  auto key = std::make_pair(entry.digest, entry.seed);
  entries_.insert_or_assign(std::move(key), std::move(entry));
}

std::optional<CassetteEntry> Cassette::Find(const std::string& digest,
                                            std::int64_t seed) const {
  std::lock_guard lock(mu_);
  const auto it = entries_.find({digest, seed});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t Cassette::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

GenerationResult ReplayBackend::DoGenerate(const GenerationRequest& request) {
  const std::string digest = Sha256Hex(request.prompt);
  const auto entry = cassette_->Find(digest, request.seed);
  if (!entry) {
    throw MissingEntryError("cassette has no entry for prompt " +
                            digest.substr(0, 16) + "... seed " +
                            std::to_string(request.seed));
  }
  GenerationResult result;
  result.text = entry->response;
  result.usage = entry->usage;
  return result;
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::Load(
    const std::filesystem::path& path) {
  auto backend = std::make_unique<ScriptedBackend>();
  auto steps_from = [](const json& list) {
    std::vector<Step> steps;
    for (const json& item : list) {
      if (item.is_string()) {
        steps.push_back(Step{item.get<std::string>(), false});
      } else {
        steps.push_back(
            Step{item.at("transport_error").get<std::string>(), true});
      }
    }
    if (steps.empty()) throw Error("empty response sequence in script");
    return steps;
  };
  try {
    const json script = json::parse(ReadFile(path));
    if (script.contains("latency_ms")) {
      backend->SetLatency(std::chrono::microseconds(
          static_cast<std::int64_t>(script["latency_ms"].get<double>() * 1000)));
    }
    if (script.contains("default")) {
      backend->SetDefault(steps_from(script["default"]));
    }
    for (const json& entry : script.value("entries", json::array())) {
      backend->Script(entry.at("sentence").get<std::string>(),
                      entry.at("seed").get<std::int64_t>(),
                      steps_from(entry.at("responses")));
    }
  } catch (const json::exception& e) {
    throw Error(path.string() + ": bad mock script: " + e.what());
  }
  return backend;
}

void ScriptedBackend::Script(const std::string& tag, std::int64_t run_seed,
                             std::vector<Step> steps) {
  if (steps.empty()) throw UsageError("empty response sequence");
  std::lock_guard lock(mu_);
  scripts_[{tag, run_seed}] = std::move(steps);
}

void ScriptedBackend::ScriptTexts(const std::string& tag,
                                  std::int64_t run_seed,
                                  const std::vector<std::string>& texts) {
  std::vector<Step> steps;
  for (const std::string& text : texts) steps.push_back(Step{text, false});
  Script(tag, run_seed, std::move(steps));
}

std::int64_t ScriptedBackend::calls_for(const std::string& tag,
                                        std::int64_t run_seed) const {
  std::lock_guard lock(mu_);
  const auto it = per_key_calls_.find({tag, run_seed});
  return it == per_key_calls_.end() ? 0 : it->second;
}

GenerationResult ScriptedBackend::DoGenerate(const GenerationRequest& request) {
  ++calls_;
  Step step;
  {
    std::lock_guard lock(mu_);
    ++per_key_calls_[{request.tag, request.run_seed}];
    const auto it = scripts_.find({request.tag, request.run_seed});
    const std::vector<Step>* steps = nullptr;
    if (it != scripts_.end()) {
      steps = &it->second;
    } else if (default_) {
      steps = &*default_;
    } else {
      throw MissingEntryError("no scripted response for \"" + request.tag +
                              "\" seed " + std::to_string(request.run_seed));
    }
    const std::size_t index =
        std::min<std::size_t>(std::max(request.attempt, 1) - 1, steps->size() - 1);
    step = (*steps)[index];
  }
  if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
  if (step.transport_failure) {
    throw TransportError(TransportError::Kind::kNetwork, step.text);
  }
  return GenerationResult{step.text, {}, {}};
}

GenerationResult RecordingBackend::DoGenerate(
    const GenerationRequest& request) {
  GenerationResult result = inner_.Generate(request);
  sink_.Add(CassetteEntry{Sha256Hex(request.prompt), request.seed, result.text,
                          result.usage});
  return result;
}

void RecordCassette(Backend& backend, const std::vector<std::string>& prompts,
                    const std::vector<std::int64_t>& seeds,
                    const std::filesystem::path& path) {
  Cassette cassette;
  RecordingBackend recorder(backend, cassette);
  for (const std::string& prompt : prompts) {
    for (std::int64_t seed : seeds) {
      GenerationRequest request;
      request.prompt = prompt;
      request.seed = seed;
      request.run_seed = seed;
      recorder.Generate(request);
    }
  }
  cassette.Save(path);
}

void RecordCassette(const EndpointConfig& config,
                    const std::vector<std::string>& prompts,
                    const std::filesystem::path& path) {
  HttpBackend backend(config);
  RecordCassette(backend, prompts, {config.seed}, path);
}

}  // namespace absa
