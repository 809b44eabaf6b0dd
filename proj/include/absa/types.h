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

#ifndef ABSA_TYPES_H_
#define ABSA_TYPES_H_

#include <array>
#include <compare>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace absa {

// Base for every error the library throws. Validation rejections of model
// output are values (see annotator.h), not exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (e.g. compared a triplet with a quad).
class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Polarity { kPositive, kNegative, kNeutral };

inline constexpr std::array<Polarity, 3> kAllPolarities = {
    Polarity::kPositive, Polarity::kNegative, Polarity::kNeutral};

std::string_view ToString(Polarity polarity);
std::optional<Polarity> ParsePolarity(std::string_view text);

// TASD predicts (aspect, category, polarity) triplets; ASQP adds the
// opinion phrase, giving quads.
enum class TaskKind { kTasd, kAsqp };

std::string_view ToString(TaskKind kind);
// Accepts "tasd"/"asqp" in any case.
std::optional<TaskKind> ParseTaskKind(std::string_view text);
std::size_t Arity(TaskKind kind);

// Marker for an implicit aspect or opinion term.
inline constexpr std::string_view kNullTerm = "NULL";

// Collapses runs of ASCII whitespace to one space and trims both ends.
std::string NormalizeWhitespace(std::string_view text);

bool IsNullTerm(std::string_view term);

// True if `term` (normalized) occurs in `sentence` (normalized).
bool IsGrounded(std::string_view term, std::string_view sentence);

struct SentimentTuple {
  std::string aspect_term;
  std::string aspect_category;
  // Engaged iff the tuple is an ASQP quad.
  std::optional<std::string> opinion_term;
  Polarity polarity = Polarity::kPositive;

  static SentimentTuple Triplet(std::string aspect, std::string category,
                                Polarity polarity);
  static SentimentTuple Quad(std::string aspect, std::string category,
                             std::string opinion, Polarity polarity);

  TaskKind kind() const {
    return opinion_term ? TaskKind::kAsqp : TaskKind::kTasd;
  }
};

// Normalized view of a tuple used for equality, hashing and the fixed
// output order of voting. Field order defines the lexicographic order.
struct TupleKey {
  std::string aspect;
  std::string category;
  std::optional<std::string> opinion;
  std::string polarity;

  auto operator<=>(const TupleKey&) const = default;
  bool operator==(const TupleKey&) const = default;
};

TupleKey KeyOf(const SentimentTuple& tuple);

// Field-wise equality; terms compared after whitespace normalization.
// Throws UsageError when one side is a triplet and the other a quad.
bool TupleEqual(const SentimentTuple& lhs, const SentimentTuple& rhs);

struct Example {
  std::string text;
  std::vector<SentimentTuple> tuples;
};

// Task kind plus the closed label space used by validation.
class TaskSpec {
 public:
  // Throws UsageError on an empty or duplicated category list.
  TaskSpec(TaskKind kind, std::vector<std::string> categories);

  TaskKind kind() const { return kind_; }
  const std::vector<std::string>& categories() const { return categories_; }
  bool HasCategory(std::string_view category) const;

 private:
  TaskKind kind_;
  std::vector<std::string> categories_;
};

// Taxonomy file: one category per line; blank lines and '#' comments are
// skipped.
TaskSpec LoadTaskSpec(TaskKind kind, const std::filesystem::path& taxonomy);

}  // namespace absa

#endif  // ABSA_TYPES_H_
