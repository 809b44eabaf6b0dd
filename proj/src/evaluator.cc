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

#include "absa/evaluator.h"

#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

namespace absa {
namespace {

double Ratio(long long num, long long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double Harmonic(double p, double r) {
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

std::string GroupOf(const TupleKey& key, MacroGrouping grouping) {
  if (grouping == MacroGrouping::kCategory) return key.category;
  return key.category + "|" + key.polarity;
}

std::set<TupleKey> KeySet(const Example& example, TaskKind kind) {
  std::set<TupleKey> keys;
  for (const SentimentTuple& t : example.tuples) {
    if (t.kind() != kind) {
      throw UsageError("tuple arity does not match task in: " + example.text);
    }
    keys.insert(KeyOf(t));
  }
  return keys;
}

}  // namespace

double Counts::precision() const { return Ratio(tp, tp + fp); }
double Counts::recall() const { return Ratio(tp, tp + fn); }
double Counts::f1() const { return Harmonic(precision(), recall()); }

EvalReport Score(std::span<const Example> gold, std::span<const Example> pred,
                 const TaskSpec& task, MacroGrouping grouping) {
  if (gold.size() != pred.size()) {
    throw UsageError("gold has " + std::to_string(gold.size()) +
                     " examples, predictions have " +
                     std::to_string(pred.size()));
  }
  EvalReport report;
  report.grouping = grouping;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (NormalizeWhitespace(gold[i].text) != NormalizeWhitespace(pred[i].text)) {
      throw UsageError("sentence mismatch at example " + std::to_string(i + 1) +
                       ": \"" + gold[i].text + "\" vs \"" + pred[i].text +
                       "\"");
    }
    const std::set<TupleKey> g = KeySet(gold[i], task.kind());
    const std::set<TupleKey> p = KeySet(pred[i], task.kind());
    for (const TupleKey& key : p) {
      Counts& group = report.per_group[GroupOf(key, grouping)];
      if (g.contains(key)) {
        ++report.tp;
        ++group.tp;
      } else {
        ++report.fp;
        ++group.fp;
      }
    }
    for (const TupleKey& key : g) {
      if (!p.contains(key)) {
        ++report.fn;
        ++report.per_group[GroupOf(key, grouping)].fn;
      }
    }
  }
  const Counts total{report.tp, report.fp, report.fn};
  report.micro_precision = total.precision();
  report.micro_recall = total.recall();
  report.micro_f1 = total.f1();
  if (!report.per_group.empty()) {
    for (const auto& [name, counts] : report.per_group) {
      report.macro_precision += counts.precision();
      report.macro_recall += counts.recall();
      report.macro_f1 += counts.f1();
    }
    const auto groups = static_cast<double>(report.per_group.size());
    report.macro_precision /= groups;
    report.macro_recall /= groups;
    report.macro_f1 /= groups;
  }
  return report;
}

std::string EvalReport::ToJson() const {
  nlohmann::ordered_json groups = nlohmann::ordered_json::object();
  for (const auto& [name, c] : per_group) {
    groups[name] = {{"tp", c.tp},
                    {"fp", c.fp},
                    {"fn", c.fn},
                    {"precision", c.precision()},
                    {"recall", c.recall()},
                    {"f1", c.f1()}};
  }
  nlohmann::ordered_json out = {
      {"tp", tp},
      {"fp", fp},
      {"fn", fn},
      {"micro_precision", micro_precision},
      {"micro_recall", micro_recall},
      {"micro_f1", micro_f1},
      {"macro_precision", macro_precision},
      {"macro_recall", macro_recall},
      {"macro_f1", macro_f1},
      {"macro_grouping", grouping == MacroGrouping::kCategory
                             ? "category"
                             : "category_polarity"},
      {"per_group", groups},
  };
  return out.dump(2);
}

std::string EvalReport::ToTable() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-36s %6s %6s %6s %8s %8s %8s\n",
                "group", "tp", "fp", "fn", "P", "R", "F1");
  out << line;
  for (const auto& [name, c] : per_group) {
    std::snprintf(line, sizeof(line), "%-36.36s %6lld %6lld %6lld %8.4f %8.4f %8.4f\n",
                  name.c_str(), c.tp, c.fp, c.fn, c.precision(), c.recall(),
                  c.f1());
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-36s %6lld %6lld %6lld %8.4f %8.4f %8.4f\n",
                "micro", tp, fp, fn, micro_precision, micro_recall, micro_f1);
  out << line;
  std::snprintf(line, sizeof(line), "%-36s %6s %6s %6s %8.4f %8.4f %8.4f\n",
                "macro", "", "", "", macro_precision, macro_recall, macro_f1);
  out << line;
  return out.str();
}

}  // namespace absa
