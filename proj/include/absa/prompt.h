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

#ifndef ABSA_PROMPT_H_
#define ABSA_PROMPT_H_

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "absa/types.h"

namespace absa {

// Annotation prompt for one task, built from a versioned text asset (see
// assets/prompt_template.txt for the section format). The preamble is
// stored with the category and polarity lists already substituted.
struct PromptTemplate {
  TaskKind task = TaskKind::kAsqp;
  std::string preamble;
  std::string extraction_instruction;
  // Wraps the rendered few-shot items; contains {examples}.
  std::string examples_block;
  // One few-shot item; contains {sentence} and {label}.
  std::string example_format;
  // Final block; contains {target} exactly once.
  std::string query;
  // SHA-256 of the asset bytes the template was built from.
  std::string checksum;
};

PromptTemplate ParsePromptTemplate(std::string_view asset,
                                   const TaskSpec& task);
PromptTemplate LoadPromptTemplate(const std::filesystem::path& path,
                                  const TaskSpec& task);
std::filesystem::path DefaultPromptTemplatePath();

// Preamble, instruction, optional few-shot block, then the query. Throws
// UsageError if a few-shot example has tuples of the wrong arity.
std::string ConstructPrompt(const PromptTemplate& tmpl,
                            std::span<const Example> few_shot,
                            std::string_view target_text);

// Single-pass substitution of {name} placeholders. Unknown names and
// braces that do not form a placeholder are copied through.
std::string RenderPlaceholders(
    std::string_view text, const std::map<std::string, std::string>& values);

}  // namespace absa

#endif  // ABSA_PROMPT_H_
