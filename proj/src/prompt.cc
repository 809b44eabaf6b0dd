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

#include "absa/prompt.h"

#include <vector>

#include "absa/dataset_io.h"
#include "absa/digest.h"

namespace absa {
namespace {

struct Section {
  std::string name;
  std::string task;  // empty for the generic variant
  std::vector<std::string> lines;
};

std::string Body(const Section& section) {
  std::size_t begin = 0;
  std::size_t end = section.lines.size();
  auto blank = [](const std::string& line) {
    return NormalizeWhitespace(line).empty();
  };
  while (begin < end && blank(section.lines[begin])) ++begin;
  while (end > begin && blank(section.lines[end - 1])) --end;
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += '\n';
    out += section.lines[i];
  }
  return out;
}

std::vector<Section> SplitSections(std::string_view asset) {
  std::vector<Section> sections;
  std::size_t offset = 0;
  while (offset < asset.size()) {
    std::size_t end = asset.find('\n', offset);
    if (end == std::string_view::npos) end = asset.size();
    std::string_view line = asset.substr(offset, end - offset);
    offset = end + 1;
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (line.starts_with("[[") && line.ends_with("]]")) {
      const std::string_view header = line.substr(2, line.size() - 4);
      const std::size_t colon = header.find(':');
      Section section;
      section.name = std::string(header.substr(0, colon));
      if (colon != std::string_view::npos) {
        section.task = std::string(header.substr(colon + 1));
      }
      sections.push_back(std::move(section));
    } else if (!sections.empty()) {
      sections.back().lines.emplace_back(line);
    }
  }
  return sections;
}

std::string Pick(const std::vector<Section>& sections, std::string_view name,
                 TaskKind kind) {
  const Section* generic = nullptr;
  const Section* specific = nullptr;
  for (const Section& s : sections) {
    if (s.name != name) continue;
    if (s.task.empty()) {
      generic = &s;
    } else if (ParseTaskKind(s.task) == kind) {
      specific = &s;
    }
  }
  const Section* chosen = specific != nullptr ? specific : generic;
  if (chosen == nullptr) {
    throw Error("prompt template has no [[" + std::string(name) +
                "]] section for " + std::string(ToString(kind)));
  }
  return Body(*chosen);
}

std::size_t Count(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error("invalid prompt template: " + what);
}

std::string JoinCategories(const TaskSpec& task) {
  std::string out;
  for (const std::string& c : task.categories()) {
    if (!out.empty()) out += ", ";
    out += c;
  }
  return out;
}

std::string JoinPolarities() {
  std::string out;
  for (Polarity p : kAllPolarities) {
    if (!out.empty()) out += ", ";
    out += ToString(p);
  }
  return out;
}

}  // namespace

std::string RenderPlaceholders(
    std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      const std::size_t close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto it =
            values.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

PromptTemplate ParsePromptTemplate(std::string_view asset,
                                   const TaskSpec& task) {
  const std::vector<Section> sections = SplitSections(asset);
  PromptTemplate tmpl;
  tmpl.task = task.kind();
  const std::string preamble = Pick(sections, "preamble", task.kind());
  tmpl.extraction_instruction = Pick(sections, "instruction", task.kind());
  tmpl.examples_block = Pick(sections, "examples", task.kind());
  tmpl.example_format = Pick(sections, "example", task.kind());
  tmpl.query = Pick(sections, "query", task.kind());

  Require(preamble.find("{categories}") != std::string::npos,
          "preamble lacks {categories}");
  Require(preamble.find("{polarities}") != std::string::npos,
          "preamble lacks {polarities}");
  Require(!NormalizeWhitespace(tmpl.extraction_instruction).empty(),
          "empty extraction instruction");
  Require(tmpl.examples_block.find("{examples}") != std::string::npos,
          "examples block lacks {examples}");
  Require(tmpl.example_format.find("{sentence}") != std::string::npos &&
              tmpl.example_format.find("{label}") != std::string::npos,
          "example format needs {sentence} and {label}");
  Require(Count(tmpl.query, "{target}") == 1,
          "query must contain {target} exactly once");

  tmpl.preamble = RenderPlaceholders(
      preamble,
      {{"categories", JoinCategories(task)}, {"polarities", JoinPolarities()}});
  tmpl.checksum = Sha256Hex(asset);
  return tmpl;
}

PromptTemplate LoadPromptTemplate(const std::filesystem::path& path,
                                  const TaskSpec& task) {
  return ParsePromptTemplate(ReadFile(path), task);
}

std::filesystem::path DefaultPromptTemplatePath() {
  return std::filesystem::path(ABSA_ASSET_DIR) / "prompt_template.txt";
}

std::string ConstructPrompt(const PromptTemplate& tmpl,
                            std::span<const Example> few_shot,
                            std::string_view target_text) {
  std::string prompt = tmpl.preamble;
  prompt += "\n\n";
  prompt += tmpl.extraction_instruction;
  prompt += "\n\n";
  if (!few_shot.empty()) {
    std::string items;
    for (const Example& example : few_shot) {
      for (const SentimentTuple& t : example.tuples) {
        if (t.kind() != tmpl.task) {
          throw UsageError("few-shot example has the wrong tuple arity: " +
                           example.text);
        }
      }
      if (!items.empty()) items += "\n\n";
      items += RenderPlaceholders(
          tmpl.example_format,
          {{"sentence", example.text}, {"label", SerializeLabel(example.tuples)}});
    }
    prompt += RenderPlaceholders(tmpl.examples_block, {{"examples", items}});
    prompt += "\n\n";
  }
  prompt += RenderPlaceholders(tmpl.query, {{"target", std::string(target_text)}});
  return prompt;
}

}  // namespace absa
