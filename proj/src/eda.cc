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
#include <cctype>
#include <set>

#include "absa/dataset_io.h"
#include "absa/digest.h"

namespace absa {
namespace {

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> tokens;
  const std::string normalized = NormalizeWhitespace(text);
  std::size_t start = 0;
  while (start < normalized.size()) {
    std::size_t end = normalized.find(' ', start);
    if (end == std::string::npos) end = normalized.size();
    tokens.push_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

bool IsTrailingPunct(char c) {
  return kTrailingPunctuation.find(c) != std::string_view::npos;
}

// "tasty.!" -> {"tasty", ".!"}
std::pair<std::string_view, std::string_view> SplitTrailingPunct(
    std::string_view token) {
  std::size_t end = token.size();
  while (end > 0 && IsTrailingPunct(token[end - 1])) --end;
  return {token.substr(0, end), token.substr(end)};
}

bool LastTokenMatches(std::string_view token, std::string_view term_token) {
  if (!token.starts_with(term_token)) return false;
  const std::string_view rest = token.substr(term_token.size());
  return std::all_of(rest.begin(), rest.end(), IsTrailingPunct);
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::size_t> FreeIndices(const std::vector<int>& span_of) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < span_of.size(); ++i) {
    if (span_of[i] < 0) out.push_back(i);
  }
  return out;
}

template <typename T>
const T& Choose(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng.Below(items.size()))];
}

// Free tokens that have at least one synonym.
std::vector<std::size_t> SynonymSources(const std::vector<std::string>& tokens,
                                        const std::vector<int>& span_of,
                                        const SynonymProvider& synonyms) {
  std::vector<std::size_t> out;
  for (std::size_t i : FreeIndices(span_of)) {
    const auto word = SplitTrailingPunct(tokens[i]).first;
    if (!word.empty() && !synonyms.Synonyms(word).empty()) out.push_back(i);
  }
  return out;
}

}  // namespace

TokenizedSentence Tokenize(std::string_view sentence,
                           std::span<const SentimentTuple> tuples) {
  TokenizedSentence out;
  out.tokens = SplitWhitespace(sentence);

  std::set<std::string> terms;
  for (const SentimentTuple& t : tuples) {
    terms.insert(NormalizeWhitespace(t.aspect_term));
    if (t.opinion_term) terms.insert(NormalizeWhitespace(*t.opinion_term));
  }

  std::vector<TokenSpan> spans;
  for (const std::string& term : terms) {
    if (term.empty() || term == kNullTerm) continue;
    const std::vector<std::string> parts = SplitWhitespace(term);
    const std::size_t k = parts.size();
    bool found = false;
    for (std::size_t i = 0; i + k <= out.tokens.size(); ++i) {
      bool match = true;
      for (std::size_t j = 0; j + 1 < k && match; ++j) {
        match = out.tokens[i + j] == parts[j];
      }
      if (match && LastTokenMatches(out.tokens[i + k - 1], parts[k - 1])) {
        spans.push_back(TokenSpan{i, i + k});
        found = true;
      }
    }
    if (!found) throw UnlocatableTermError(term);
  }

  std::sort(spans.begin(), spans.end(), [](const TokenSpan& a, const TokenSpan& b) {
    return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
  });
  for (const TokenSpan& span : spans) {
    if (!out.protected_spans.empty() &&
        span.begin < out.protected_spans.back().end) {
      out.protected_spans.back().end =
          std::max(out.protected_spans.back().end, span.end);
    } else {
      out.protected_spans.push_back(span);
    }
  }
  return out;
}

LexiconSynonyms LexiconSynonyms::Parse(std::string_view text) {
  LexiconSynonyms lexicon;
  lexicon.checksum_ = Sha256Hex(text);
  std::size_t offset = 0;
  std::size_t line_number = 0;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    const std::size_t line_offset = offset;
    offset = end + 1;
    ++line_number;
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (NormalizeWhitespace(line).empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError("lexicon line needs word<TAB>synonyms", line_number,
                       line_offset);
    }
    const std::string word = Lower(NormalizeWhitespace(line.substr(0, tab)));
    auto& candidates = lexicon.entries_[word];
    std::string_view rest = line.substr(tab + 1);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string candidate =
          NormalizeWhitespace(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{}
                                             : rest.substr(comma + 1);
      // Multi-word synonyms would change the token count by more than one.
      if (candidate.empty() || candidate.find(' ') != std::string::npos ||
          Lower(candidate) == word) {
        continue;
      }
      if (std::find(candidates.begin(), candidates.end(), candidate) ==
          candidates.end()) {
        candidates.push_back(candidate);
      }
    }
  }
  return lexicon;
}

LexiconSynonyms LexiconSynonyms::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

std::vector<std::string> LexiconSynonyms::Synonyms(std::string_view word) const {
  if (word.empty()) return {};
  const auto it = entries_.find(Lower(word));
  if (it == entries_.end()) return {};
  const bool capital = std::isupper(static_cast<unsigned char>(word.front()));
  std::vector<std::string> out = it->second;
  if (capital) {
    for (std::string& c : out) {
      c.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(c.front())));
    }
  }
  return out;
}

std::filesystem::path DefaultLexiconPath() {
  return std::filesystem::path(ABSA_ASSET_DIR) / "lexicon.tsv";
}

std::string JoinTokens(std::span<const std::string> tokens) {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

AugmentedTokens AugmentOnce(const TokenizedSentence& sentence,
                            const SynonymProvider& synonyms, Rng& rng) {
  AugmentedTokens out;
  out.tokens = sentence.tokens;
  out.span_of.assign(out.tokens.size(), -1);
  for (std::size_t s = 0; s < sentence.protected_spans.size(); ++s) {
    const TokenSpan& span = sentence.protected_spans[s];
    for (std::size_t i = span.begin; i < span.end; ++i) {
      out.span_of[i] = static_cast<int>(s);
    }
  }
  auto& tokens = out.tokens;
  auto& span_of = out.span_of;

  // Insertion: synonym of a free word, at a gap that does not split a term.
  if (const auto sources = SynonymSources(tokens, span_of, synonyms);
      !sources.empty()) {
    const std::size_t src = Choose(sources, rng);
    const std::string word =
        std::string(SplitTrailingPunct(tokens[src]).first);
    const std::string synonym = Choose(synonyms.Synonyms(word), rng);
    std::vector<std::size_t> gaps;
    for (std::size_t g = 0; g <= tokens.size(); ++g) {
      const bool inside = g > 0 && g < tokens.size() && span_of[g - 1] >= 0 &&
                          span_of[g - 1] == span_of[g];
      if (!inside) gaps.push_back(g);
    }
    const std::size_t gap = Choose(gaps, rng);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(gap), synonym);
    span_of.insert(span_of.begin() + static_cast<std::ptrdiff_t>(gap), -1);
    out.inserted = true;
  }

  // Deletion of one free token; never empties the sentence.
  if (const auto free = FreeIndices(span_of);
      !free.empty() && tokens.size() > 1) {
    const std::size_t victim = Choose(free, rng);
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(victim));
    span_of.erase(span_of.begin() + static_cast<std::ptrdiff_t>(victim));
    out.deleted = true;
  }

  // Swap of two distinct free tokens.
  if (const auto free = FreeIndices(span_of); free.size() >= 2) {
    const std::size_t a = static_cast<std::size_t>(rng.Below(free.size()));
    std::size_t b = static_cast<std::size_t>(rng.Below(free.size() - 1));
    if (b >= a) ++b;
    std::swap(tokens[free[a]], tokens[free[b]]);
    out.swapped = true;
  }

  // Synonym replacement of one free token, keeping trailing punctuation.
  if (const auto sources = SynonymSources(tokens, span_of, synonyms);
      !sources.empty()) {
    const std::size_t target = Choose(sources, rng);
    const auto [word, punct] = SplitTrailingPunct(tokens[target]);
    std::string replacement = Choose(synonyms.Synonyms(word), rng);
    replacement += punct;
    tokens[target] = std::move(replacement);
    out.replaced = true;
  }
  return out;
}

std::vector<Example> AugmentExample(const Example& example,
                                    const AugmentConfig& config,
                                    const SynonymProvider& synonyms,
                                    std::uint64_t stream) {
  if (config.alpha < 1) throw UsageError("alpha must be >= 1");
  const TokenizedSentence tokenized = Tokenize(example.text, example.tuples);
  Rng rng(config.seed, stream);
  std::vector<Example> out;
  out.reserve(static_cast<std::size_t>(config.alpha));
  for (int i = 0; i < config.alpha; ++i) {
    const AugmentedTokens augmented = AugmentOnce(tokenized, synonyms, rng);
    out.push_back(Example{JoinTokens(augmented.tokens), example.tuples});
  }
  return out;
}

AugmentOutcome AugmentDataset(std::span<const Example> examples,
                              const AugmentConfig& config,
                              const SynonymProvider& synonyms) {
  if (config.alpha < 1) throw UsageError("alpha must be >= 1");
  AugmentOutcome outcome;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    try {
      std::vector<Example> copies =
          AugmentExample(examples[i], config, synonyms, i);
      outcome.augmented.insert(outcome.augmented.end(),
                               std::make_move_iterator(copies.begin()),
                               std::make_move_iterator(copies.end()));
    } catch (const UnlocatableTermError&) {
      outcome.skipped.push_back(i);
    }
  }
  return outcome;
}

}  // namespace absa
