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

// Term-aware easy data augmentation.
//
// Every augmentation applies, in order, one random insertion, deletion,
// swap and synonym replacement to the whitespace tokens of a sentence.
// Tokens covered by an aspect or opinion term are never touched and no
// token is inserted inside a term, so the tuple list stays valid for the
// augmented sentence and is copied unchanged.

#ifndef ABSA_EDA_H_
#define ABSA_EDA_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absa/random.h"
#include "absa/types.h"

namespace absa {

// Characters a token may carry after a term, e.g. "tasty." for "tasty".
inline constexpr std::string_view kTrailingPunctuation = ".,!?;:";

// Half-open token range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const TokenSpan&) const = default;
};

struct TokenizedSentence {
  std::vector<std::string> tokens;
  // Sorted, merged, non-overlapping.
  std::vector<TokenSpan> protected_spans;
};

// A non-NULL term could not be matched to whole tokens of the sentence.
// The example is skipped by augmentation.
class UnlocatableTermError : public Error {
 public:
  explicit UnlocatableTermError(const std::string& term)
      : Error("term not locatable at token level: \"" + term + "\""),
        term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

// Whitespace tokenization; protects every occurrence of every distinct
// non-NULL aspect/opinion term. A term's last token may match a sentence
// token carrying extra trailing punctuation.
TokenizedSentence Tokenize(std::string_view sentence,
                           std::span<const SentimentTuple> tuples);

class SynonymProvider {
 public:
  virtual ~SynonymProvider() = default;
  // Candidates for `word` (already stripped of trailing punctuation),
  // never including the word itself. Single tokens only.
  virtual std::vector<std::string> Synonyms(std::string_view word) const = 0;
};

// Static lexicon, one "word<TAB>syn1,syn2,..." entry per line, keyed by
// lowercase word. A candidate takes an uppercase first letter when the
// queried word starts with one.
class LexiconSynonyms : public SynonymProvider {
 public:
  static LexiconSynonyms Parse(std::string_view text);
  static LexiconSynonyms Load(const std::filesystem::path& path);

  std::vector<std::string> Synonyms(std::string_view word) const override;

  std::size_t size() const { return entries_.size(); }
  // SHA-256 of the source text.
  const std::string& checksum() const { return checksum_; }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
  std::string checksum_;
};

std::filesystem::path DefaultLexiconPath();

struct AugmentConfig {
  int alpha = 10;
  std::uint64_t seed = 0;
};

// Tokens after one augmentation together with the term each token belongs
// to (-1 for free tokens), so callers can audit protected spans.
struct AugmentedTokens {
  std::vector<std::string> tokens;
  std::vector<int> span_of;
  bool inserted = false;
  bool deleted = false;
  bool swapped = false;
  bool replaced = false;
};

// One insertion -> deletion -> swap -> synonym pass. Operations without an
// eligible token, position or synonym are skipped.
AugmentedTokens AugmentOnce(const TokenizedSentence& sentence,
                            const SynonymProvider& synonyms, Rng& rng);

// `alpha` augmented copies of `example`, drawn from the stream
// (config.seed, stream). Throws UnlocatableTermError.
std::vector<Example> AugmentExample(const Example& example,
                                    const AugmentConfig& config,
                                    const SynonymProvider& synonyms,
                                    std::uint64_t stream = 0);

struct AugmentOutcome {
  // Augmented examples only, grouped by source example in input order.
  std::vector<Example> augmented;
  // Indices of examples whose terms could not be located.
  std::vector<std::size_t> skipped;
};

// Example i uses stream i. Throws UsageError if alpha < 1.
AugmentOutcome AugmentDataset(std::span<const Example> examples,
                              const AugmentConfig& config,
                              const SynonymProvider& synonyms);

std::string JoinTokens(std::span<const std::string> tokens);

}  // namespace absa

#endif  // ABSA_EDA_H_
