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

#ifndef ABSA_EVALUATOR_H_
#define ABSA_EVALUATOR_H_

#include <map>
#include <span>
#include <string>

#include "absa/types.h"

namespace absa {

// Grouping used for the macro average.
enum class MacroGrouping { kCategory, kCategoryPolarity };

struct Counts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

// All ratios use 0/0 = 0.
struct EvalReport {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;
  double micro_precision = 0;
  double micro_recall = 0;
  double micro_f1 = 0;
  // Unweighted means over groups.
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
  MacroGrouping grouping = MacroGrouping::kCategory;
  std::map<std::string, Counts> per_group;

  std::string ToJson() const;
  std::string ToTable() const;
};

// Exact-match scoring. Per example, gold and predicted tuples are sets
// under TupleEqual; counts are summed over examples. Macro scores average
// every group seen in gold or predictions. Throws UsageError if the lists
// differ in length or a sentence differs at some index.
EvalReport Score(std::span<const Example> gold, std::span<const Example> pred,
                 const TaskSpec& task,
                 MacroGrouping grouping = MacroGrouping::kCategory);

}  // namespace absa

#endif  // ABSA_EVALUATOR_H_
