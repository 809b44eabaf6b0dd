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

#include "absa/annotator.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "absa/random.h"

namespace absa {
namespace {

using Clock = std::chrono::steady_clock;

std::string_view TrimView(std::string_view s) {
  auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

// ```json\n[...]\n``` -> [...]
std::string_view StripCodeFence(std::string_view s) {
  s = TrimView(s);
  if (!s.starts_with("```") || s.size() < 6 || !s.ends_with("```")) return s;
  const std::size_t first_newline = s.find('\n');
  if (first_newline == std::string_view::npos) return s;
  return TrimView(s.substr(first_newline + 1, s.size() - 3 - first_newline - 1));
}

Validation Reject(Rejection rejection, std::string detail) {
  Validation v;
  v.rejection = rejection;
  v.detail = std::move(detail);
  return v;
}

SentimentTuple FromKey(const TupleKey& key) {
  const Polarity polarity = *ParsePolarity(key.polarity);
  if (key.opinion) {
    return SentimentTuple::Quad(key.aspect, key.category, *key.opinion,
                                polarity);
  }
  return SentimentTuple::Triplet(key.aspect, key.category, polarity);
}

}  // namespace

std::string_view ToString(Rejection rejection) {
  switch (rejection) {
    case Rejection::kParseError:
      return "parse_error";
    case Rejection::kBadCategory:
      return "bad_category";
    case Rejection::kBadPolarity:
      return "bad_polarity";
    case Rejection::kUngroundedPhrase:
      return "ungrounded_phrase";
    case Rejection::kBadArity:
      return "bad_arity";
  }
  return "";
}

Validation ValidateLabel(std::string_view raw, std::string_view sentence,
                         const ValidationRules& rules) {
  const LabelRowsResult parsed = ParseLabelRows(StripCodeFence(raw));
  if (parsed.error) {
    return Reject(Rejection::kParseError, parsed.error->message);
  }
  const std::size_t arity = Arity(rules.task.kind());
  for (const auto& row : parsed.rows) {
    if (row.size() != arity) {
      return Reject(Rejection::kBadArity,
                    "tuple has " + std::to_string(row.size()) + " fields");
    }
  }
  for (const auto& row : parsed.rows) {
    if (!rules.task.HasCategory(row[1])) {
      return Reject(Rejection::kBadCategory, row[1]);
    }
  }
  LabelResult typed = RowsToTuples(parsed.rows, rules.task.kind());
  if (typed.error) {
    return Reject(Rejection::kBadPolarity, typed.error->message);
  }
  if (rules.require_phrase_grounding) {
    for (const SentimentTuple& t : typed.tuples) {
      std::vector<const std::string*> terms = {&t.aspect_term};
      if (t.opinion_term) terms.push_back(&*t.opinion_term);
      for (const std::string* term : terms) {
        if (!IsNullTerm(*term) && !IsGrounded(*term, sentence)) {
          return Reject(Rejection::kUngroundedPhrase, *term);
        }
      }
    }
  }
  Validation v;
  v.tuples = std::move(typed.tuples);
  return v;
}

std::int64_t AttemptSeed(std::int64_t run_seed, int attempt) {
  if (attempt <= 1) return run_seed;
  SplitMix64 mix(static_cast<std::uint64_t>(run_seed) ^
                 (static_cast<std::uint64_t>(attempt) << 40));
  // Non-negative and within 31 bits; some servers reject larger seeds.
  return static_cast<std::int64_t>(mix.Next() >> 33);
}

RunResult AnnotateOneRun(Backend& backend, const std::string& prompt,
                         const std::string& sentence, std::int64_t run_seed,
                         const ValidationRules& rules) {
  if (rules.max_regenerations < 1) {
    throw UsageError("max_regenerations must be >= 1");
  }
  RunResult result;
  for (int attempt = 1; attempt <= rules.max_regenerations; ++attempt) {
    GenerationRequest request;
    request.prompt = prompt;
    request.seed = AttemptSeed(run_seed, attempt);
    request.tag = sentence;
    request.run_seed = run_seed;
    request.attempt = attempt;
    const GenerationResult generated = backend.Generate(request);
    result.call_latency += generated.latency;
    result.attempts = attempt;
    Validation v = ValidateLabel(generated.text, sentence, rules);
    if (v.accepted()) {
      result.tuples = std::move(v.tuples);
      return result;
    }
    result.rejections.push_back(*v.rejection);
  }
  return result;  // every answer rejected: empty label
}

std::vector<SentimentTuple> MajorityVote(
    std::span<const std::vector<SentimentTuple>> runs, const VoteConfig& vote) {
  if (vote.m < 1) throw UsageError("m must be >= 1");
  if (runs.size() != static_cast<std::size_t>(vote.m)) {
    throw UsageError("expected " + std::to_string(vote.m) + " runs, got " +
                     std::to_string(runs.size()));
  }
  std::optional<TaskKind> kind;
  std::map<TupleKey, int> counts;
  for (const auto& run : runs) {
    std::set<TupleKey> distinct;
    for (const SentimentTuple& t : run) {
      if (kind && *kind != t.kind()) {
        throw UsageError("runs mix triplets and quads");
      }
      kind = t.kind();
      distinct.insert(KeyOf(t));
    }
    for (const TupleKey& key : distinct) ++counts[key];
  }
  std::vector<SentimentTuple> out;
  for (const auto& [key, count] : counts) {
    if (2 * count > vote.m) out.push_back(FromKey(key));
  }
  return out;
}

AnnotateResult AnnotateDataset(std::span<const std::string> sentences,
                               std::span<const Example> few_shot,
                               const PromptTemplate& tmpl, Backend& backend,
                               const ValidationRules& rules,
                               const AnnotateOptions& options) {
  if (options.seeds.size() != static_cast<std::size_t>(options.vote.m)) {
    throw UsageError("need one seed per run: m=" +
                     std::to_string(options.vote.m) + ", seeds=" +
                     std::to_string(options.seeds.size()));
  }
  if (options.jobs < 1) throw UsageError("jobs must be >= 1");

  AnnotateResult result;
  result.records.resize(sentences.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  std::optional<std::size_t> failed_index;
  std::exception_ptr failure;

  auto process = [&](std::size_t i) {
    const std::string& sentence = sentences[i];
    const auto t0 = Clock::now();
    AnnotationRecord record;
    record.example_text = sentence;
    record.meta.model = options.model;
    record.meta.temperature = options.temperature;
    record.meta.shots = few_shot.size();
    record.meta.seeds = options.seeds;
    record.meta.started_at = FormatIso8601(UnixNow());

    const std::string prompt = ConstructPrompt(tmpl, few_shot, sentence);
    std::int64_t calls = 0;
    std::chrono::nanoseconds latency{0};
    for (std::int64_t seed : options.seeds) {
      RunResult run;
      try {
        run = AnnotateOneRun(backend, prompt, sentence, seed, rules);
      } catch (const TransportError& e) {
        if (options.failure_policy == FailurePolicy::kFailFast) throw;
        record.meta.error = e.what();
        break;
      }
      calls += run.attempts;
      latency += run.call_latency;
      std::vector<std::string> reasons;
      for (Rejection r : run.rejections) reasons.emplace_back(ToString(r));
      record.meta.rejections.push_back(std::move(reasons));
      record.run_outputs.push_back(std::move(run.tuples));
      record.retry_counts.push_back(run.attempts);
    }
    if (!record.failed()) {
      record.final_label = MajorityVote(record.run_outputs, options.vote);
    }
    record.meta.finished_at = FormatIso8601(UnixNow());
    if (options.meter != nullptr) {
      options.meter->Record(Phase::kAnnotate, i, Clock::now() - t0);
    }
    std::lock_guard lock(mu);
    result.generation_calls += calls;
    result.call_latency += latency;
    result.records[i] = std::move(record);
  };

  auto worker = [&]() {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= sentences.size()) return;
      try {
        process(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failed_index || i < *failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        abort.store(true);
        return;
      }
    }
  };

  const std::size_t width = std::min<std::size_t>(
      static_cast<std::size_t>(options.jobs), std::max<std::size_t>(sentences.size(), 1));
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<Example> AssembleTrainingSet(
    std::span<const AnnotationRecord> records, std::span<const Example> gold) {
  std::vector<Example> out;
  for (const AnnotationRecord& record : records) {
    if (record.failed()) continue;
    out.push_back(Example{record.example_text, record.final_label});
  }
  out.insert(out.end(), gold.begin(), gold.end());
  return out;
}

std::vector<std::string> UnlabeledPool(
    std::span<const Example> pool, std::span<const std::size_t> shot_indices) {
  const std::set<std::size_t> excluded(shot_indices.begin(), shot_indices.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!excluded.contains(i)) out.push_back(pool[i].text);
  }
  return out;
}

}  // namespace absa
