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

#include "absa/types.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

namespace absa {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view ToString(Polarity polarity) {
  switch (polarity) {
    case Polarity::kPositive:
      return "positive";
    case Polarity::kNegative:
      return "negative";
    case Polarity::kNeutral:
      return "neutral";
  }
  return "";
}

std::optional<Polarity> ParsePolarity(std::string_view text) {
  for (Polarity p : kAllPolarities) {
    if (ToString(p) == text) return p;
  }
  return std::nullopt;
}

std::string_view ToString(TaskKind kind) {
  return kind == TaskKind::kTasd ? "tasd" : "asqp";
}

std::optional<TaskKind> ParseTaskKind(std::string_view text) {
  const std::string lowered = Lower(text);
  if (lowered == "tasd") return TaskKind::kTasd;
  if (lowered == "asqp") return TaskKind::kAsqp;
  return std::nullopt;
}

std::size_t Arity(TaskKind kind) { return kind == TaskKind::kTasd ? 3 : 4; }

std::string NormalizeWhitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

bool IsNullTerm(std::string_view term) {
  return NormalizeWhitespace(term) == kNullTerm;
}

bool IsGrounded(std::string_view term, std::string_view sentence) {
  const std::string needle = NormalizeWhitespace(term);
  if (needle.empty()) return false;
  return NormalizeWhitespace(sentence).find(needle) != std::string::npos;
}

SentimentTuple SentimentTuple::Triplet(std::string aspect,
                                       std::string category,
                                       Polarity polarity) {
  return SentimentTuple{std::move(aspect), std::move(category), std::nullopt,
                        polarity};
}

SentimentTuple SentimentTuple::Quad(std::string aspect, std::string category,
                                    std::string opinion, Polarity polarity) {
  return SentimentTuple{std::move(aspect), std::move(category),
                        std::move(opinion), polarity};
}

TupleKey KeyOf(const SentimentTuple& tuple) {
  TupleKey key;
  key.aspect = NormalizeWhitespace(tuple.aspect_term);
  key.category = tuple.aspect_category;
  if (tuple.opinion_term) key.opinion = NormalizeWhitespace(*tuple.opinion_term);
  key.polarity = std::string(ToString(tuple.polarity));
  return key;
}

bool TupleEqual(const SentimentTuple& lhs, const SentimentTuple& rhs) {
  if (lhs.kind() != rhs.kind()) {
    throw UsageError("cannot compare a TASD triplet with an ASQP quad");
  }
  return KeyOf(lhs) == KeyOf(rhs);
}

TaskSpec::TaskSpec(TaskKind kind, std::vector<std::string> categories)
    : kind_(kind), categories_(std::move(categories)) {
  if (categories_.empty()) {
    throw UsageError("task spec needs at least one aspect category");
  }
  std::set<std::string_view> seen;
  for (const std::string& category : categories_) {
    if (category.empty()) throw UsageError("empty aspect category");
    if (!seen.insert(category).second) {
      throw UsageError("duplicate aspect category: " + category);
    }
  }
}

bool TaskSpec::HasCategory(std::string_view category) const {
  return std::find(categories_.begin(), categories_.end(), category) !=
         categories_.end();
}

TaskSpec LoadTaskSpec(TaskKind kind, const std::filesystem::path& taxonomy) {
  std::ifstream in(taxonomy);
  if (!in) throw Error("cannot open taxonomy file " + taxonomy.string());
  std::vector<std::string> categories;
  std::string line;
  while (std::getline(in, line)) {
    std::string category = NormalizeWhitespace(line);
    if (category.empty() || category.front() == '#') continue;
    categories.push_back(std::move(category));
  }
  return TaskSpec(kind, std::move(categories));
}

}  // namespace absa
