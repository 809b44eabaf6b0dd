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

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>

#include "absa/random.h"
#include "json.hpp"

namespace absa {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kBom = "\xEF\xBB\xBF";

// Returns the offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> FindInvalidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t j = 1; j < len; ++j) {
      const auto cc = static_cast<unsigned char>(s[i + j]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) ||
                          (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return i;
    }
    i += len;
  }
  return std::nullopt;
}

ordered_json TupleToJson(const SentimentTuple& t) {
  ordered_json row = ordered_json::array();
  row.push_back(t.aspect_term);
  row.push_back(t.aspect_category);
  if (t.opinion_term) row.push_back(*t.opinion_term);
  row.push_back(std::string(ToString(t.polarity)));
  return row;
}

ordered_json TuplesToJson(const std::vector<SentimentTuple>& tuples) {
  ordered_json list = ordered_json::array();
  for (const SentimentTuple& t : tuples) list.push_back(TupleToJson(t));
  return list;
}

std::string Dump(const ordered_json& value) {
  return value.dump(-1, ' ', false, ordered_json::error_handler_t::strict);
}

std::vector<SentimentTuple> TuplesFromJson(const ordered_json& value,
                                           TaskKind kind) {
  if (!value.is_array()) throw Error("label must be an array");
  LabelRows rows;
  for (const auto& row : value) {
    if (!row.is_array()) throw Error("label entries must be arrays");
    std::vector<std::string> fields;
    for (const auto& field : row) {
      if (!field.is_string()) throw Error("tuple fields must be strings");
      fields.push_back(field.get<std::string>());
    }
    rows.push_back(std::move(fields));
  }
  LabelResult result = RowsToTuples(rows, kind);
  if (result.error) throw Error(result.error->message);
  return std::move(result.tuples);
}

void CheckWritable(const Example& example, TaskKind kind) {
  if (example.text.find('\n') != std::string::npos ||
      example.text.find('\r') != std::string::npos) {
    throw UsageError("sentence contains a line break: " + example.text);
  }
  if (example.text.find(kLabelSeparator) != std::string::npos) {
    throw UsageError("sentence contains the label separator: " +
                     example.text);
  }
  for (const SentimentTuple& t : example.tuples) {
    if (t.kind() != kind) {
      throw UsageError("tuple arity does not match task " +
                       std::string(ToString(kind)) + ": " + example.text);
    }
  }
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line,
                       std::size_t byte_offset)
    : Error(line == 0 ? message
                      : "line " + std::to_string(line) + ", byte " +
                            std::to_string(byte_offset) + ": " + message),
      line_(line),
      byte_offset_(byte_offset) {}

LabelRowsResult ParseLabelRows(std::string_view label) {
  LabelRowsResult result;
  ordered_json value;
  try {
    value = ordered_json::parse(label);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports the 1-based index of the offending byte.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    result.error = LabelError{LabelIssue::kParseError,
                              std::min(at, label.size()),
                              "malformed label JSON"};
    return result;
  }
  auto structural = [&](std::string message) {
    result.rows.clear();
    result.error = LabelError{LabelIssue::kParseError, 0, std::move(message)};
    return result;
  };
  if (!value.is_array()) return structural("label is not a JSON array");
  for (const auto& row : value) {
    if (!row.is_array()) return structural("label entry is not an array");
    std::vector<std::string> fields;
    for (const auto& field : row) {
      if (!field.is_string()) return structural("tuple field is not a string");
      fields.push_back(field.get<std::string>());
    }
    result.rows.push_back(std::move(fields));
  }
  return result;
}

LabelResult RowsToTuples(const LabelRows& rows, TaskKind kind) {
  LabelResult result;
  const std::size_t arity = Arity(kind);
  for (const auto& row : rows) {
    if (row.size() != arity) {
      result.error = LabelError{
          LabelIssue::kBadArity, 0,
          "expected " + std::to_string(arity) + " fields per tuple, got " +
              std::to_string(row.size())};
      return result;
    }
  }
  for (const auto& row : rows) {
    const auto polarity = ParsePolarity(row.back());
    if (!polarity) {
      result.tuples.clear();
      result.error = LabelError{LabelIssue::kBadPolarity, 0,
                                "unknown polarity: " + row.back()};
      return result;
    }
    if (kind == TaskKind::kTasd) {
      result.tuples.push_back(SentimentTuple::Triplet(row[0], row[1], *polarity));
    } else {
      result.tuples.push_back(
          SentimentTuple::Quad(row[0], row[1], row[2], *polarity));
    }
  }
  return result;
}

LabelResult ParseLabel(std::string_view label, TaskKind kind) {
  LabelRowsResult rows = ParseLabelRows(label);
  if (rows.error) return LabelResult{{}, rows.error};
  return RowsToTuples(rows.rows, kind);
}

std::string SerializeLabel(const std::vector<SentimentTuple>& tuples) {
  return Dump(TuplesToJson(tuples));
}

std::string SerializeExample(const Example& example) {
  std::string line = example.text;
  line += kLabelSeparator;
  line += SerializeLabel(example.tuples);
  return line;
}

Example ParseDatasetLine(std::string_view line, const TaskSpec& task,
                         const ParseOptions& options,
                         std::vector<std::string>* warnings,
                         std::size_t line_number, std::size_t line_offset) {
  auto fail = [&](const std::string& message, std::size_t column) {
    throw ParseError(message, line_number, line_offset + column);
  };
  if (auto bad = FindInvalidUtf8(line)) fail("invalid UTF-8", *bad);
  const std::size_t sep = line.find(kLabelSeparator);
  if (sep == std::string_view::npos) fail("missing '####' separator", 0);

  Example example;
  example.text = std::string(line.substr(0, sep));
  if (NormalizeWhitespace(example.text).empty()) fail("empty sentence", 0);

  const std::size_t label_start = sep + kLabelSeparator.size();
  const std::string_view label = line.substr(label_start);
  LabelResult parsed = ParseLabel(label, task.kind());
  if (parsed.error) {
    const std::string prefix =
        parsed.error->issue == LabelIssue::kBadArity ? "arity mismatch: " : "";
    fail(prefix + parsed.error->message, label_start + parsed.error->offset);
  }
  example.tuples = std::move(parsed.tuples);

  for (const SentimentTuple& t : example.tuples) {
    if (NormalizeWhitespace(t.aspect_category).empty()) {
      fail("empty aspect category", label_start);
    }
    if (options.strict_taxonomy && !task.HasCategory(t.aspect_category)) {
      fail("unknown aspect category: " + t.aspect_category, label_start);
    }
    std::vector<const std::string*> terms = {&t.aspect_term};
    if (t.opinion_term) terms.push_back(&*t.opinion_term);
    for (const std::string* term : terms) {
      if (IsNullTerm(*term) || IsGrounded(*term, example.text)) continue;
      const std::string message =
          "phrase not found in sentence: \"" + *term + "\"";
      if (options.grounding == Grounding::kStrict) fail(message, label_start);
      if (warnings != nullptr) {
        warnings->push_back("line " + std::to_string(line_number) + ": " +
                            message);
      }
    }
  }
  return example;
}

DatasetFile ParseDatasetText(std::string_view contents, const TaskSpec& task,
                             const ParseOptions& options) {
  DatasetFile file{{}, task, {}, {}};
  std::size_t offset = 0;
  if (contents.starts_with(kBom)) offset = kBom.size();
  std::size_t line_number = 0;
  while (offset < contents.size()) {
    std::size_t end = contents.find('\n', offset);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(offset, end - offset);
    if (line.ends_with('\r')) line.remove_suffix(1);
    ++line_number;
    file.examples.push_back(ParseDatasetLine(line, task, options,
                                             &file.warnings, line_number,
                                             offset));
    offset = end + 1;
  }
  return file;
}

DatasetFile ParseDataset(const std::filesystem::path& path,
                         const TaskSpec& task, const ParseOptions& options) {
  const std::string contents = ReadFile(path);
  try {
    DatasetFile file = ParseDatasetText(contents, task, options);
    file.path = path;
    return file;
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line(),
                     e.byte_offset());
  }
}

std::string FormatDataset(const std::vector<Example>& examples,
                          const TaskSpec& task) {
  std::string out;
  for (const Example& example : examples) {
    CheckWritable(example, task.kind());
    out += SerializeExample(example);
    out += '\n';
  }
  return out;
}

void WriteDataset(const std::vector<Example>& examples, const TaskSpec& task,
                  const std::filesystem::path& path) {
  WriteFileAtomic(path, FormatDataset(examples, task));
}

std::vector<std::string> ReadSentences(const std::filesystem::path& path) {
  const std::string contents = ReadFile(path);
  std::vector<std::string> sentences;
  std::size_t offset = contents.starts_with(kBom) ? kBom.size() : 0;
  while (offset < contents.size()) {
    std::size_t end = contents.find('\n', offset);
    if (end == std::string::npos) end = contents.size();
    std::string_view line(contents.data() + offset, end - offset);
    offset = end + 1;
    if (line.ends_with('\r')) line.remove_suffix(1);
    const std::size_t sep = line.find(kLabelSeparator);
    if (sep != std::string_view::npos) line = line.substr(0, sep);
    if (NormalizeWhitespace(line).empty()) continue;
    sentences.emplace_back(line);
  }
  return sentences;
}

std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t k,
                                       std::uint64_t seed) {
  if (k > n) {
    throw UsageError("cannot sample " + std::to_string(k) +
                     " examples from " + std::to_string(n));
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.Below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::vector<Example> SampleFewShot(const DatasetFile& dataset, std::size_t k,
                                   std::uint64_t seed) {
  std::vector<Example> shots;
  for (std::size_t i : SampleIndices(dataset.examples.size(), k, seed)) {
    shots.push_back(dataset.examples[i]);
  }
  return shots;
}

std::string SerializeAnnotation(const AnnotationRecord& record) {
  ordered_json runs = ordered_json::array();
  for (const auto& run : record.run_outputs) runs.push_back(TuplesToJson(run));

  ordered_json meta;
  meta["model"] = record.meta.model;
  meta["temperature"] = record.meta.temperature;
  meta["shots"] = record.meta.shots;
  meta["seeds"] = record.meta.seeds;
  meta["started_at"] = record.meta.started_at;
  meta["finished_at"] = record.meta.finished_at;
  meta["rejections"] = record.meta.rejections;
  if (record.meta.error) meta["error"] = *record.meta.error;

  ordered_json out;
  out["text"] = record.example_text;
  out["runs"] = std::move(runs);
  out["retries"] = record.retry_counts;
  out["label"] = TuplesToJson(record.final_label);
  out["meta"] = std::move(meta);
  return Dump(out);
}

AnnotationRecord ParseAnnotation(std::string_view line, TaskKind kind) {
  AnnotationRecord record;
  try {
    const ordered_json value = ordered_json::parse(line);
    record.example_text = value.at("text").get<std::string>();
    for (const auto& run : value.at("runs")) {
      record.run_outputs.push_back(TuplesFromJson(run, kind));
    }
    record.retry_counts = value.at("retries").get<std::vector<int>>();
    record.final_label = TuplesFromJson(value.at("label"), kind);
    const ordered_json& meta = value.at("meta");
    record.meta.model = meta.at("model").get<std::string>();
    record.meta.temperature = meta.at("temperature").get<double>();
    record.meta.shots = meta.at("shots").get<std::size_t>();
    record.meta.seeds = meta.at("seeds").get<std::vector<std::int64_t>>();
    record.meta.started_at = meta.at("started_at").get<std::string>();
    record.meta.finished_at = meta.at("finished_at").get<std::string>();
    if (meta.contains("rejections")) {
      record.meta.rejections =
          meta.at("rejections").get<std::vector<std::vector<std::string>>>();
    }
    if (meta.contains("error")) {
      record.meta.error = meta.at("error").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad annotation record: ") + e.what(), 0, 0);
  }
  return record;
}

void WriteAnnotations(const std::vector<AnnotationRecord>& records,
                      const std::filesystem::path& path) {
  std::string out;
  for (const AnnotationRecord& record : records) {
    out += SerializeAnnotation(record);
    out += '\n';
  }
  WriteFileAtomic(path, out);
}

std::vector<AnnotationRecord> ReadAnnotations(
    const std::filesystem::path& path, TaskKind kind) {
  const std::string contents = ReadFile(path);
  std::vector<AnnotationRecord> records;
  std::size_t offset = 0;
  std::size_t line_number = 0;
  while (offset < contents.size()) {
    std::size_t end = contents.find('\n', offset);
    if (end == std::string::npos) end = contents.size();
    ++line_number;
    const std::string_view line(contents.data() + offset, end - offset);
    try {
      records.push_back(ParseAnnotation(line, kind));
    } catch (const Error& e) {
      throw ParseError(path.string() + ": " + e.what(), line_number, offset);
    }
    offset = end + 1;
  }
  return records;
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace absa
