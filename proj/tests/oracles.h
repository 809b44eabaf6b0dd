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

// Independent reference implementations used to cross-check the library.
// They work on plain strings and deliberately avoid absa::TupleKey, the
// normalization helpers and any std::map keyed by tuples.

#ifndef ABSA_TESTS_ORACLES_H_
#define ABSA_TESTS_ORACLES_H_

#include <algorithm>
#include <string>
#include <vector>

#include "absa/types.h"

namespace absa::oracle {

// A tuple as a flat list of its fields.
inline std::vector<std::string> Fields(const SentimentTuple& t) {
  std::vector<std::string> f = {t.aspect_term, t.aspect_category};
  if (t.opinion_term) f.push_back(*t.opinion_term);
  f.push_back(std::string(ToString(t.polarity)));
  return f;
}

inline bool Contains(const std::vector<SentimentTuple>& run,
                     const std::vector<std::string>& fields) {
  for (const SentimentTuple& t : run) {
    if (Fields(t) == fields) return true;
  }
  return false;
}

// Brute force: for every candidate seen anywhere, count the runs that
// contain it and keep it when that count exceeds m/2. Order-free.
inline std::vector<std::vector<std::string>> MajorityVote(
    const std::vector<std::vector<SentimentTuple>>& runs) {
  std::vector<std::vector<std::string>> kept;
  const int m = static_cast<int>(runs.size());
  for (const auto& run : runs) {
    for (const SentimentTuple& candidate : run) {
      const std::vector<std::string> fields = Fields(candidate);
      bool seen = false;
      for (const auto& k : kept) seen = seen || k == fields;
      if (seen) continue;
      int votes = 0;
      for (const auto& other : runs) votes += Contains(other, fields) ? 1 : 0;
      if (votes * 2 > m) kept.push_back(fields);
    }
  }
  return kept;
}

struct Scores {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

inline Scores Finish(long long tp, long long fp, long long fn) {
  Scores s{tp, fp, fn};
  s.precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
  s.recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
  s.f1 = s.precision + s.recall == 0
             ? 0.0
             : 2 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

// Distinct tuples of one example.
inline std::vector<std::vector<std::string>> Distinct(
    const std::vector<SentimentTuple>& tuples) {
  std::vector<std::vector<std::string>> out;
  for (const SentimentTuple& t : tuples) {
    const auto f = Fields(t);
    bool dup = false;
    for (const auto& o : out) dup = dup || o == f;
    if (!dup) out.push_back(f);
  }
  return out;
}

// Nested-loop exact-match micro scorer. `only_category`, when non-empty,
// restricts both sides to tuples of that category.
inline Scores MicroScore(const std::vector<Example>& gold,
                         const std::vector<Example>& pred,
                         const std::string& only_category = "") {
  long long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto g = Distinct(gold[i].tuples);
    auto p = Distinct(pred[i].tuples);
    for (const auto& pt : p) {
      if (!only_category.empty() && pt[1] != only_category) continue;
      bool hit = false;
      for (const auto& gt : g) hit = hit || gt == pt;
      (hit ? tp : fp) += 1;
    }
    for (const auto& gt : g) {
      if (!only_category.empty() && gt[1] != only_category) continue;
      bool hit = false;
      for (const auto& pt : p) hit = hit || gt == pt;
      if (!hit) ++fn;
    }
  }
  return Finish(tp, fp, fn);
}

// Unweighted mean over every category that occurs in gold or pred.
inline Scores MacroByCategory(const std::vector<Example>& gold,
                              const std::vector<Example>& pred) {
  std::vector<std::string> categories;
  for (const auto* side : {&gold, &pred}) {
    for (const Example& e : *side) {
      for (const SentimentTuple& t : e.tuples) {
        bool seen = false;
        for (const auto& c : categories) seen = seen || c == t.aspect_category;
        if (!seen) categories.push_back(t.aspect_category);
      }
    }
  }
  Scores out;
  if (categories.empty()) return out;
  // Summed in sorted order so floating-point results compare exactly.
  std::sort(categories.begin(), categories.end());
  for (const auto& c : categories) {
    const Scores s = MicroScore(gold, pred, c);
    out.precision += s.precision;
    out.recall += s.recall;
    out.f1 += s.f1;
  }
  out.precision /= double(categories.size());
  out.recall /= double(categories.size());
  out.f1 /= double(categories.size());
  return out;
}

}  // namespace absa::oracle

#endif  // ABSA_TESTS_ORACLES_H_
