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

// Dataset and annotation file formats.
//
// Dataset line (one example per line, '\n' terminated):
//
//   SENTENCE####[["a","c","p"], ...]          TASD
//   SENTENCE####[["a","c","o","p"], ...]      ASQP
//
// The label part is a JSON array of JSON string arrays, written without
// insignificant whitespace. Implicit terms are the string "NULL"; an
// unlabeled example is written as "[]". The sentence is everything before
// the first "####".

#ifndef ABSA_DATASET_IO_H_
#define ABSA_DATASET_IO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absa/types.h"

namespace absa {

inline constexpr std::string_view kLabelSeparator = "####";

// Malformed input, located by 1-based line and 0-based byte offset into
// the file (line and offset are 0 when the error is not file-bound).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line,
             std::size_t byte_offset);

  std::size_t line() const { return line_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t line_;
  std::size_t byte_offset_;
};

// Failure modes of label parsing, in the order they are checked.
enum class LabelIssue { kParseError, kBadArity, kBadPolarity };

struct LabelError {
  LabelIssue issue;
  // Offset into the label text where the problem was detected.
  std::size_t offset = 0;
  std::string message;
};

// Rows of a label before typing: each row is the list of strings of one
// tuple. Arity is not checked.
using LabelRows = std::vector<std::vector<std::string>>;

struct LabelRowsResult {
  LabelRows rows;
  std::optional<LabelError> error;
};

// Parses the JSON label grammar into rows (issue kParseError only).
LabelRowsResult ParseLabelRows(std::string_view label);

struct LabelResult {
  std::vector<SentimentTuple> tuples;
  std::optional<LabelError> error;
};

// Rows to tuples for `kind`: kBadArity if any row has the wrong length,
// then kBadPolarity if any polarity is outside the closed set.
LabelResult RowsToTuples(const LabelRows& rows, TaskKind kind);

// ParseLabelRows followed by RowsToTuples.
LabelResult ParseLabel(std::string_view label, TaskKind kind);

// Canonical label text, e.g. [["pizza","food general","tasty","positive"]].
std::string SerializeLabel(const std::vector<SentimentTuple>& tuples);
std::string SerializeExample(const Example& example);

enum class Grounding {
  kStrict,  // ungrounded phrase is a ParseError
  kWarn,    // ungrounded phrase is recorded in DatasetFile::warnings
};

struct ParseOptions {
  // Reject categories outside the TaskSpec taxonomy.
  bool strict_taxonomy = true;
  Grounding grounding = Grounding::kStrict;
};

struct DatasetFile {
  std::filesystem::path path;
  TaskSpec task;
  std::vector<Example> examples;
  std::vector<std::string> warnings;
};

// Parses one dataset line (without its terminator). `line_number` and
// `line_offset` only decorate errors.
Example ParseDatasetLine(std::string_view line, const TaskSpec& task,
                         const ParseOptions& options,
                         std::vector<std::string>* warnings = nullptr,
                         std::size_t line_number = 0,
                         std::size_t line_offset = 0);

DatasetFile ParseDatasetText(std::string_view contents, const TaskSpec& task,
                             const ParseOptions& options = {});
DatasetFile ParseDataset(const std::filesystem::path& path,
                         const TaskSpec& task,
                         const ParseOptions& options = {});

// Each example must have the task's arity and a sentence without "\n" or
// the separator; violations throw UsageError before anything is written.
std::string FormatDataset(const std::vector<Example>& examples,
                          const TaskSpec& task);
void WriteDataset(const std::vector<Example>& examples, const TaskSpec& task,
                  const std::filesystem::path& path);

// Reads a file of plain sentences, one per line. Lines in dataset format
// keep only their sentence part. Blank lines are skipped.
std::vector<std::string> ReadSentences(const std::filesystem::path& path);

// Indices of k distinct draws from [0, n), uniform without replacement, in
// draw order (partial Fisher-Yates over an xoshiro256** stream).
std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t k,
                                       std::uint64_t seed);

// Throws UsageError if k exceeds the dataset size.
std::vector<Example> SampleFewShot(const DatasetFile& dataset, std::size_t k,
                                   std::uint64_t seed);

struct AnnotationMeta {
  std::string model;
  double temperature = 0.8;
  std::size_t shots = 0;
  std::vector<std::int64_t> seeds;
  std::string started_at;
  std::string finished_at;
  // Rejection reasons per run, one entry per rejected attempt.
  std::vector<std::vector<std::string>> rejections;
  // Set when a transport failure aborted the example.
  std::optional<std::string> error;
};

// Provenance of one annotated sentence. For a completed record the three
// per-run vectors have length m and every label tuple occurs in more than
// m/2 runs. A record with meta.error holds only the runs that finished.
struct AnnotationRecord {
  std::string example_text;
  std::vector<std::vector<SentimentTuple>> run_outputs;
  std::vector<int> retry_counts;
  std::vector<SentimentTuple> final_label;
  AnnotationMeta meta;

  bool failed() const { return meta.error.has_value(); }
};

std::string SerializeAnnotation(const AnnotationRecord& record);
AnnotationRecord ParseAnnotation(std::string_view line, TaskKind kind);

void WriteAnnotations(const std::vector<AnnotationRecord>& records,
                      const std::filesystem::path& path);
std::vector<AnnotationRecord> ReadAnnotations(
    const std::filesystem::path& path, TaskKind kind);

// Writes to a sibling temp file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents);
std::string ReadFile(const std::filesystem::path& path);

}  // namespace absa

#endif  // ABSA_DATASET_IO_H_
