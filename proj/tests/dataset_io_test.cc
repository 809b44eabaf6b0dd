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

#include "absa/dataset_io.h"

#include <set>

#include "gtest/gtest.h"
#include "test_util.h"

namespace absa {
namespace {

const TaskSpec& Restaurant() {
  static const TaskSpec spec = LoadTaskSpec(
      TaskKind::kAsqp, testing::DataPath("restaurant_categories.txt"));
  return spec;
}

TEST(LabelTest, ParsesQuadsAndTriplets) {
  const LabelResult quads = ParseLabel(
      R"([["NULL","food quality","great","positive"]])", TaskKind::kAsqp);
  ASSERT_FALSE(quads.error);
  ASSERT_EQ(quads.tuples.size(), 1u);
  EXPECT_EQ(quads.tuples[0].aspect_term, "NULL");
  EXPECT_EQ(quads.tuples[0].opinion_term, "great");

  const LabelResult triplets =
      ParseLabel(R"([["pizza","food quality","negative"]])", TaskKind::kTasd);
  ASSERT_FALSE(triplets.error);
  EXPECT_FALSE(triplets.tuples[0].opinion_term.has_value());

  EXPECT_TRUE(ParseLabel("[]", TaskKind::kTasd).tuples.empty());
}

TEST(LabelTest, ClassifiesProblems) {
  EXPECT_EQ(ParseLabel("[[\"a\"", TaskKind::kTasd).error->issue,
            LabelIssue::kParseError);
  EXPECT_EQ(ParseLabel("{}", TaskKind::kTasd).error->issue,
            LabelIssue::kParseError);
  EXPECT_EQ(ParseLabel("[[\"a\",1,\"positive\"]]", TaskKind::kTasd).error->issue,
            LabelIssue::kParseError);
  EXPECT_EQ(ParseLabel(R"([["a","food quality","positive"]])", TaskKind::kAsqp)
                .error->issue,
            LabelIssue::kBadArity);
  EXPECT_EQ(ParseLabel(R"([["a","food quality","good"]])", TaskKind::kTasd)
                .error->issue,
            LabelIssue::kBadPolarity);
}

TEST(LabelTest, SerializesCompactlyWithoutEscapingUnicode) {
  const std::vector<SentimentTuple> tuples = {SentimentTuple::Quad(
      "crème brûlée", "food quality", "say \"wow\"", Polarity::kPositive)};
  EXPECT_EQ(SerializeLabel(tuples),
            R"([["crème brûlée","food quality","say \"wow\"","positive"]])");
  EXPECT_EQ(SerializeLabel({}), "[]");
}

TEST(DatasetLineTest, SplitsAtFirstSeparator) {
  const Example e = ParseDatasetLine(
      "Nice location near the river .####"
      R"([["location","location general","Nice","positive"]])",
      Restaurant(), {});
  EXPECT_EQ(e.text, "Nice location near the river .");
  ASSERT_EQ(e.tuples.size(), 1u);
  EXPECT_EQ(e.tuples[0].polarity, Polarity::kPositive);
}

TEST(DatasetLineTest, ReportsLineAndByteOffset) {
  const std::string text =
      "Fine .####[]\n"
      "Broken .####[[\"x\",\"food quality\",\"x\"\n";
  try {
    ParseDatasetText(text, Restaurant());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    // Line 2 starts at byte 13; the label starts 12 bytes later and the
    // parser stops at end of input.
    EXPECT_GT(e.byte_offset(), 13u + 12u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(DatasetLineTest, RejectsStructuralProblems) {
  const ParseOptions strict;
  EXPECT_THROW(ParseDatasetLine("no separator", Restaurant(), strict),
               ParseError);
  EXPECT_THROW(ParseDatasetLine("   ####[]", Restaurant(), strict), ParseError);
  EXPECT_THROW(ParseDatasetLine("Bad \xC3 byte .####[]", Restaurant(), strict),
               ParseError);
  EXPECT_THROW(
      ParseDatasetLine(R"(Okay .####[["NULL","food taste","Okay","neutral"]])",
                       Restaurant(), strict),
      ParseError);
  EXPECT_THROW(
      ParseDatasetLine(R"(Okay .####[["NULL","food general","Okay"]])",
                       Restaurant(), strict),
      ParseError);
}

TEST(DatasetLineTest, UngroundedPhraseIsErrorOrWarning) {
  const std::string line =
      R"(Okay .####[["soup","food quality","Okay","neutral"]])";
  EXPECT_THROW(ParseDatasetLine(line, Restaurant(), {}), ParseError);

  ParseOptions lenient;
  lenient.grounding = Grounding::kWarn;
  std::vector<std::string> warnings;
  const Example e =
      ParseDatasetLine(line, Restaurant(), lenient, &warnings, 4, 0);
  EXPECT_EQ(e.tuples.size(), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("line 4"), std::string::npos);
}

TEST(DatasetLineTest, UnknownCategoryAllowedWhenTaxonomyNotStrict) {
  ParseOptions loose;
  loose.strict_taxonomy = false;
  const Example e = ParseDatasetLine(
      R"(Okay .####[["NULL","food taste","Okay","neutral"]])", Restaurant(),
      loose);
  EXPECT_EQ(e.tuples[0].aspect_category, "food taste");
}

TEST(DatasetTest, RoundTripIsByteIdentical) {
  const std::string original =
      ReadFile(testing::DataPath("roundtrip_asqp.txt"));
  const DatasetFile parsed = ParseDatasetText(original, Restaurant());
  EXPECT_EQ(parsed.examples.size(), 20u);
  EXPECT_EQ(FormatDataset(parsed.examples, Restaurant()), original);
}

TEST(DatasetTest, AcceptsBomAndCrlf) {
  const DatasetFile parsed =
      ParseDatasetText("\xEF\xBB\xBFOne .####[]\r\nTwo .####[]\r\n",
                       Restaurant());
  ASSERT_EQ(parsed.examples.size(), 2u);
  EXPECT_EQ(parsed.examples[0].text, "One .");
  EXPECT_EQ(parsed.examples[1].text, "Two .");
}

TEST(DatasetTest, WriterRefusesUnrepresentableExamples) {
  EXPECT_THROW(FormatDataset({Example{"a\nb", {}}}, Restaurant()), UsageError);
  EXPECT_THROW(FormatDataset({Example{"a####b", {}}}, Restaurant()),
               UsageError);
  EXPECT_THROW(
      FormatDataset({Example{"a", {SentimentTuple::Triplet(
                                      "a", "food general",
                                      Polarity::kPositive)}}},
                    Restaurant()),
      UsageError);
}

TEST(DatasetTest, WriteIsAtomicAndReadable) {
  testing::TempDir dir;
  const std::string path = dir / "out.txt";
  const DatasetFile parsed = ParseDataset(
      testing::DataPath("restaurant_asqp_train.txt"), Restaurant());
  WriteDataset(parsed.examples, Restaurant(), path);
  EXPECT_EQ(ReadFile(path),
            ReadFile(testing::DataPath("restaurant_asqp_train.txt")));
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    EXPECT_EQ(entry.path().filename(), "out.txt");
  }
}

TEST(ReadSentencesTest, AcceptsPlainAndLabeledLines) {
  testing::TempDir dir;
  WriteFileAtomic(dir / "s.txt", "First one .\n\nSecond .####[]\n");
  EXPECT_EQ(ReadSentences(dir / "s.txt"),
            (std::vector<std::string>{"First one .", "Second ."}));
}

TEST(SampleTest, IndicesAreDistinctAndDeterministic) {
  const auto a = SampleIndices(30, 10, 5);
  EXPECT_EQ(a, SampleIndices(30, 10, 5));
  EXPECT_NE(a, SampleIndices(30, 10, 6));
  EXPECT_EQ(std::set<std::size_t>(a.begin(), a.end()).size(), 10u);
  for (std::size_t i : a) EXPECT_LT(i, 30u);
  EXPECT_TRUE(SampleIndices(3, 0, 1).empty());
  EXPECT_THROW(SampleIndices(3, 4, 1), UsageError);
}

TEST(SampleTest, SmallerDrawIsPrefixOfLargerOne) {
  const auto small = SampleIndices(100, 10, 9);
  const auto large = SampleIndices(100, 50, 9);
  EXPECT_TRUE(std::equal(small.begin(), small.end(), large.begin()));
}

TEST(AnnotationTest, RoundTripsRecords) {
  AnnotationRecord r;
  r.example_text = "The soup was hot .";
  r.run_outputs = {{SentimentTuple::Quad("soup", "food quality", "hot",
                                         Polarity::kPositive)},
                   {}};
  r.retry_counts = {1, 10};
  r.final_label = {};
  r.meta.model = "m";
  r.meta.temperature = 0.8;
  r.meta.shots = 10;
  r.meta.seeds = {1, 2};
  r.meta.started_at = "2026-01-01T00:00:00.000Z";
  r.meta.finished_at = "2026-01-01T00:00:01.000Z";
  r.meta.rejections = {{}, std::vector<std::string>(10, "parse_error")};
  const std::string line = SerializeAnnotation(r);
  EXPECT_TRUE(line.starts_with(R"({"text":"The soup was hot .","runs":)"));
  const AnnotationRecord back = ParseAnnotation(line, TaskKind::kAsqp);
  EXPECT_EQ(SerializeAnnotation(back), line);
  EXPECT_FALSE(back.failed());

  r.meta.error = "connection refused";
  const AnnotationRecord failed =
      ParseAnnotation(SerializeAnnotation(r), TaskKind::kAsqp);
  EXPECT_TRUE(failed.failed());
}

}  // namespace
}  // namespace absa
