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

#include "absa/eda.h"

#include <algorithm>

#include "absa/dataset_io.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace absa {
namespace {

using Tuples = std::vector<SentimentTuple>;

SentimentTuple Q(const std::string& a, const std::string& o) {
  return SentimentTuple::Quad(a, "food quality", o, Polarity::kPositive);
}

LexiconSynonyms SmallLexicon() {
  return LexiconSynonyms::Parse(
      "# test lexicon\n"
      "good\tfine,decent\n"
      "really\ttruly\n"
      "was\tseemed\n"
      "the\tthis\n"
      "place\tspot, venue ,two words,place\n");
}

TEST(TokenizeTest, ProtectsEveryOccurrenceAndMergesOverlaps) {
  const std::vector<SentimentTuple> tuples = {Q("wine list", "long"),
                                              Q("list", "NULL")};
  const TokenizedSentence t =
      Tokenize("The wine list is long , the list is long .", tuples);
  EXPECT_EQ(t.tokens.size(), 11u);
  EXPECT_EQ(t.protected_spans,
            (std::vector<TokenSpan>{{1, 3}, {4, 5}, {7, 8}, {9, 10}}));
}

TEST(TokenizeTest, LastTokenMayCarryTrailingPunctuation) {
  const TokenizedSentence t = Tokenize("Great pizza!", Tuples{Q("pizza", "Great")});
  EXPECT_EQ(t.protected_spans, (std::vector<TokenSpan>{{0, 1}, {1, 2}}));
}

TEST(TokenizeTest, SubwordTermIsUnlocatable) {
  EXPECT_THROW(Tokenize("The pizzas were good", Tuples{Q("pizza", "good")}),
               UnlocatableTermError);
  EXPECT_THROW(Tokenize("The (pizza) was good", Tuples{Q("pizza", "good")}),
               UnlocatableTermError);
}

TEST(LexiconTest, ParsesAndFiltersCandidates) {
  const LexiconSynonyms lexicon = SmallLexicon();
  EXPECT_EQ(lexicon.size(), 5u);
  EXPECT_EQ(lexicon.Synonyms("place"),
            (std::vector<std::string>{"spot", "venue"}));
  EXPECT_EQ(lexicon.Synonyms("Good"),
            (std::vector<std::string>{"Fine", "Decent"}));
  EXPECT_TRUE(lexicon.Synonyms("unknown").empty());
  EXPECT_EQ(lexicon.checksum().size(), 64u);
  EXPECT_THROW(LexiconSynonyms::Parse("no tab here\n"), ParseError);
}

TEST(LexiconTest, ShippedLexiconLoads) {
  const LexiconSynonyms lexicon = LexiconSynonyms::Load(DefaultLexiconPath());
  EXPECT_GT(lexicon.size(), 50u);
  EXPECT_FALSE(lexicon.Synonyms("delicious").empty());
}

TEST(AugmentOnceTest, AppliesAllFourOperations) {
  const LexiconSynonyms lexicon = SmallLexicon();
  const TokenizedSentence t =
      Tokenize("the place was really good and the soup was hot",
               Tuples{Q("soup", "hot")});
  Rng rng(1);
  const AugmentedTokens out = AugmentOnce(t, lexicon, rng);
  EXPECT_TRUE(out.inserted);
  EXPECT_TRUE(out.deleted);
  EXPECT_TRUE(out.swapped);
  EXPECT_TRUE(out.replaced);
  EXPECT_EQ(out.tokens.size(), t.tokens.size());
}

TEST(AugmentOnceTest, SkipsImpossibleOperations) {
  const LexiconSynonyms lexicon = SmallLexicon();
  // Only protected tokens: nothing can change.
  const TokenizedSentence only_terms =
      Tokenize("pizza great", Tuples{Q("pizza", "great")});
  Rng rng(5);
  const AugmentedTokens out = AugmentOnce(only_terms, lexicon, rng);
  EXPECT_FALSE(out.inserted || out.deleted || out.swapped || out.replaced);
  EXPECT_EQ(out.tokens, only_terms.tokens);

  // A single free token without synonyms is never deleted.
  const TokenizedSentence single = Tokenize("hmm", Tuples{});
  const AugmentedTokens kept = AugmentOnce(single, lexicon, rng);
  EXPECT_EQ(kept.tokens, (std::vector<std::string>{"hmm"}));
}

TEST(AugmentOnceTest, ProtectedTokensKeepOrderAndContent) {
  const LexiconSynonyms lexicon = SmallLexicon();
  const TokenizedSentence t = Tokenize(
      "the wine list was really good but the place was loud",
      Tuples{Q("wine list", "good"), Q("place", "loud")});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const AugmentedTokens out = AugmentOnce(t, lexicon, rng);
    std::vector<std::string> protected_before, protected_after;
    for (const TokenSpan& s : t.protected_spans) {
      for (std::size_t i = s.begin; i < s.end; ++i) {
        protected_before.push_back(t.tokens[i]);
      }
    }
    std::vector<int> run_ids;  // span id of each run of protected tokens
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
      if (out.span_of[i] < 0) continue;
      protected_after.push_back(out.tokens[i]);
      if (i == 0 || out.span_of[i - 1] != out.span_of[i]) {
        run_ids.push_back(out.span_of[i]);
      }
    }
    // Each span is still one contiguous block, in the original order.
    EXPECT_EQ(run_ids.size(), t.protected_spans.size());
    EXPECT_TRUE(std::is_sorted(run_ids.begin(), run_ids.end()));
    ASSERT_EQ(protected_before, protected_after) << "seed " << seed;
    const std::string joined = JoinTokens(out.tokens);
    EXPECT_NE(joined.find("wine list"), std::string::npos);
    const long delta = static_cast<long>(out.tokens.size()) -
                       static_cast<long>(t.tokens.size());
    EXPECT_GE(delta, -1);
    EXPECT_LE(delta, 1);
  }
}

TEST(AugmentExampleTest, DeterministicPerSeedAndStream) {
  const LexiconSynonyms lexicon = SmallLexicon();
  const Example e{"the place was really good", {Q("place", "good")}};
  AugmentConfig config;
  const auto a = AugmentExample(e, config, lexicon, 0);
  const auto b = AugmentExample(e, config, lexicon, 0);
  const auto c = AugmentExample(e, config, lexicon, 1);
  ASSERT_EQ(a.size(), 10u);
  std::vector<std::string> ta, tb, tc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ta.push_back(a[i].text);
    tb.push_back(b[i].text);
    tc.push_back(c[i].text);
    EXPECT_EQ(SerializeLabel(a[i].tuples), SerializeLabel(e.tuples));
  }
  EXPECT_EQ(ta, tb);
  EXPECT_NE(ta, tc);
}

TEST(AugmentDatasetTest, CountsAndSkips) {
  const LexiconSynonyms lexicon = SmallLexicon();
  const std::vector<Example> examples = {
      {"the place was good", {Q("place", "good")}},
      {"the pizzas were good", {Q("pizza", "good")}},
      {"nothing to say", {}}};
  AugmentConfig config;
  config.alpha = 4;
  const AugmentOutcome outcome = AugmentDataset(examples, config, lexicon);
  EXPECT_EQ(outcome.augmented.size(), 8u);
  EXPECT_EQ(outcome.skipped, (std::vector<std::size_t>{1}));
  config.alpha = 0;
  EXPECT_THROW(AugmentDataset(examples, config, lexicon), UsageError);
}

}  // namespace
}  // namespace absa
