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

#include "gtest/gtest.h"
#include "test_util.h"

namespace absa {
namespace {

constexpr char kTinyTemplate[] = R"(# comment
[[preamble]]
Categories: {categories}. Polarities: {polarities}.

[[preamble:asqp]]
Quads. Categories: {categories}. Polarities: {polarities}.
[[instruction]]
Copy terms verbatim.
[[examples]]
Examples:
{examples}
[[example]]
S: {sentence}
L: {label}
[[query]]
S: {target}
L:
)";

TaskSpec Tasd() { return TaskSpec(TaskKind::kTasd, {"food quality", "service general"}); }
TaskSpec Asqp() { return TaskSpec(TaskKind::kAsqp, {"food quality", "service general"}); }

TEST(PromptTemplateTest, TaskSpecificSectionWins) {
  EXPECT_EQ(ParsePromptTemplate(kTinyTemplate, Tasd()).preamble,
            "Categories: food quality, service general. "
            "Polarities: positive, negative, neutral.");
  EXPECT_TRUE(
      ParsePromptTemplate(kTinyTemplate, Asqp()).preamble.starts_with("Quads."));
}

TEST(PromptTemplateTest, AssembledPromptHasFixedLayout) {
  const PromptTemplate tmpl = ParsePromptTemplate(kTinyTemplate, Tasd());
  const std::vector<Example> shots = {
      {"Good soup .", {SentimentTuple::Triplet("soup", "food quality",
                                               Polarity::kPositive)}},
      {"Meh .", {}}};
  EXPECT_EQ(ConstructPrompt(tmpl, shots, "Rude staff ."),
            "Categories: food quality, service general. "
            "Polarities: positive, negative, neutral.\n\n"
            "Copy terms verbatim.\n\n"
            "Examples:\n"
            "S: Good soup .\nL: [[\"soup\",\"food quality\",\"positive\"]]\n\n"
            "S: Meh .\nL: []\n\n"
            "S: Rude staff .\nL:");
}

TEST(PromptTemplateTest, ZeroShotOmitsExamplesBlock) {
  const PromptTemplate tmpl = ParsePromptTemplate(kTinyTemplate, Tasd());
  EXPECT_EQ(ConstructPrompt(tmpl, {}, "x"),
            tmpl.preamble + "\n\nCopy terms verbatim.\n\nS: x\nL:");
}

TEST(PromptTemplateTest, TargetIsInsertedLiterally) {
  const PromptTemplate tmpl = ParsePromptTemplate(kTinyTemplate, Tasd());
  const std::string prompt = ConstructPrompt(tmpl, {}, "{sentence} {target}");
  EXPECT_TRUE(prompt.ends_with("S: {sentence} {target}\nL:"));
}

TEST(PromptTemplateTest, WrongArityShotIsRejected) {
  const PromptTemplate tmpl = ParsePromptTemplate(kTinyTemplate, Asqp());
  const std::vector<Example> shots = {
      {"Good soup .", {SentimentTuple::Triplet("soup", "food quality",
                                               Polarity::kPositive)}}};
  EXPECT_THROW(ConstructPrompt(tmpl, shots, "x"), UsageError);
}

TEST(PromptTemplateTest, ValidatesPlaceholders) {
  std::string broken = kTinyTemplate;
  broken.replace(broken.find("S: {target}"), 11, "S:");
  EXPECT_THROW(ParsePromptTemplate(broken, Tasd()), Error);

  std::string doubled = kTinyTemplate;
  doubled.replace(doubled.find("S: {target}"), 11, "{target} {target}");
  EXPECT_THROW(ParsePromptTemplate(doubled, Tasd()), Error);

  std::string no_examples = kTinyTemplate;
  no_examples.replace(no_examples.find("{examples}"), 10, "none");
  EXPECT_THROW(ParsePromptTemplate(no_examples, Tasd()), Error);

  EXPECT_THROW(ParsePromptTemplate("[[preamble]]\n{categories}{polarities}\n",
                                   Tasd()),
               Error);
}

TEST(PromptTemplateTest, ChecksumTracksAssetText) {
  const PromptTemplate a = ParsePromptTemplate(kTinyTemplate, Tasd());
  const PromptTemplate b =
      ParsePromptTemplate(std::string(kTinyTemplate) + "\n", Tasd());
  EXPECT_EQ(a.checksum.size(), 64u);
  EXPECT_NE(a.checksum, b.checksum);
}

TEST(PromptTemplateTest, ShippedTemplateLoadsForBothTasks) {
  for (TaskKind kind : {TaskKind::kTasd, TaskKind::kAsqp}) {
    const TaskSpec spec = LoadTaskSpec(
        kind, testing::DataPath("restaurant_categories.txt"));
    const PromptTemplate tmpl =
        LoadPromptTemplate(DefaultPromptTemplatePath(), spec);
    EXPECT_NE(tmpl.preamble.find("food general"), std::string::npos);
    EXPECT_EQ(tmpl.preamble.find("{categories}"), std::string::npos);
    const std::string prompt = ConstructPrompt(tmpl, {}, "The tea was cold .");
    EXPECT_NE(prompt.find("The tea was cold ."), std::string::npos);
    EXPECT_NE(prompt.find(kind == TaskKind::kAsqp ? "opinion term" : "three"),
              std::string::npos);
  }
}

TEST(RenderPlaceholdersTest, SinglePassAndUnknownKeysKept) {
  EXPECT_EQ(RenderPlaceholders("{a}-{b}-{c}", {{"a", "{b}"}, {"b", "2"}}),
            "{b}-2-{c}");
  EXPECT_EQ(RenderPlaceholders("{unterminated", {{"a", "x"}}), "{unterminated");
}

}  // namespace
}  // namespace absa
