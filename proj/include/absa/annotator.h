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

// LLM pseudo-labeling with validation, regeneration and self-consistency.
//
// Each sentence is annotated m times, once per run seed. A run asks the
// model up to `max_regenerations` times and keeps the first output that
// passes ValidateLabel; if none does, the run's label is the empty list.
// The final label keeps every tuple found in more than m/2 runs.

#ifndef ABSA_ANNOTATOR_H_
#define ABSA_ANNOTATOR_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absa/client.h"
#include "absa/dataset_io.h"
#include "absa/metering.h"
#include "absa/prompt.h"
#include "absa/types.h"

namespace absa {

enum class Rejection {
  kParseError,
  kBadCategory,
  kBadPolarity,
  kUngroundedPhrase,
  kBadArity,
};

// "parse_error", "bad_category", "bad_polarity", "ungrounded_phrase",
// "bad_arity".
std::string_view ToString(Rejection rejection);

struct ValidationRules {
  TaskSpec task;
  int max_regenerations = 10;
  bool require_phrase_grounding = true;
};

struct Validation {
  std::vector<SentimentTuple> tuples;
  std::optional<Rejection> rejection;
  std::string detail;

  bool accepted() const { return !rejection.has_value(); }
};

// Accepts raw model output iff it parses as a label, every tuple has the
// task's arity, every category is in the taxonomy, every polarity is known
// and (when required) every non-NULL phrase occurs in the sentence after
// whitespace normalization. Checks run in that order over the whole list
// and the first failing check names the rejection. Surrounding whitespace
// and a Markdown code fence around the label are ignored.
Validation ValidateLabel(std::string_view raw, std::string_view sentence,
                         const ValidationRules& rules);

// Seed for the given attempt of a run. Attempt 1 uses the run seed itself;
// later attempts get distinct derived seeds so that seeded endpoints and
// replay cassettes can return a different answer.
std::int64_t AttemptSeed(std::int64_t run_seed, int attempt);

struct RunResult {
  std::vector<SentimentTuple> tuples;
  // Generation calls made: index of the first valid answer, or
  // max_regenerations when every answer was rejected.
  int attempts = 0;
  std::vector<Rejection> rejections;
  std::chrono::nanoseconds call_latency{0};
};

// Transport errors from the backend propagate.
RunResult AnnotateOneRun(Backend& backend, const std::string& prompt,
                         const std::string& sentence, std::int64_t run_seed,
                         const ValidationRules& rules);

struct VoteConfig {
  int m = 5;
};

// Tuples present in more than m/2 runs, each run counted as a set under
// TupleEqual. Output is normalized and sorted by TupleKey. Throws
// UsageError if runs.size() != m.
std::vector<SentimentTuple> MajorityVote(
    std::span<const std::vector<SentimentTuple>> runs, const VoteConfig& vote);

enum class FailurePolicy { kRecordAndContinue, kFailFast };

struct AnnotateOptions {
  // One run per seed; size must equal vote.m.
  std::vector<std::int64_t> seeds = {1, 2, 3, 4, 5};
  VoteConfig vote;
  int jobs = 1;
  FailurePolicy failure_policy = FailurePolicy::kRecordAndContinue;
  // Copied into every record's meta.
  std::string model;
  double temperature = 0.8;
  // Per-sentence wall time is recorded under Phase::kAnnotate when set.
  MeterLog* meter = nullptr;
};

struct AnnotateResult {
  std::vector<AnnotationRecord> records;
  std::int64_t generation_calls = 0;
  // Sum of per-call latencies reported by the backend.
  std::chrono::nanoseconds call_latency{0};
};

// Annotates `sentences` in order. Record i always belongs to sentence i,
// whatever the number of jobs. Under kRecordAndContinue a transport error
// ends that sentence with meta.error set and an empty label.
AnnotateResult AnnotateDataset(std::span<const std::string> sentences,
                               std::span<const Example> few_shot,
                               const PromptTemplate& tmpl, Backend& backend,
                               const ValidationRules& rules,
                               const AnnotateOptions& options);

// LLM-labeled sentences (failed records skipped) followed by the gold
// few-shot examples.
std::vector<Example> AssembleTrainingSet(
    std::span<const AnnotationRecord> records, std::span<const Example> gold);

// Sentences of `pool` except those at `shot_indices`, in pool order.
std::vector<std::string> UnlabeledPool(
    std::span<const Example> pool, std::span<const std::size_t> shot_indices);

}  // namespace absa

#endif  // ABSA_ANNOTATOR_H_
