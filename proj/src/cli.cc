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

#include "absa/cli.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "absa/annotator.h"
#include "absa/client.h"
#include "absa/dataset_io.h"
#include "absa/digest.h"
#include "absa/eda.h"
#include "absa/evaluator.h"
#include "absa/metering.h"
#include "absa/prompt.h"
#include "json.hpp"

namespace absa {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct CommonOptions {
  std::string task = "asqp";
  std::string taxonomy;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string manifest_out;
};

void AddCommon(CLI::App* cmd, CommonOptions* o, bool taxonomy_required) {
  cmd->add_option("--task", o->task, "tasd or asqp")
      ->check(CLI::IsMember({"tasd", "asqp"}, CLI::ignore_case))
      ->envname("ABSA_TASK")
      ->capture_default_str();
  auto* taxonomy = cmd->add_option("--taxonomy", o->taxonomy,
                                   "aspect categories, one per line")
                       ->envname("ABSA_TAXONOMY");
  if (taxonomy_required) taxonomy->required();
  cmd->add_option("--seed", o->seed, "seed for sampling and augmentation")
      ->capture_default_str();
  cmd->add_option("--jobs", o->jobs, "worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  cmd->add_option("--manifest-out", o->manifest_out, "run manifest (JSON)");
}

TaskKind KindOf(const CommonOptions& o) { return *ParseTaskKind(o.task); }

// Placeholder taxonomy for commands that do not check categories.
TaskSpec SpecOf(const CommonOptions& o) {
  if (o.taxonomy.empty()) return TaskSpec(KindOf(o), {"*"});
  return LoadTaskSpec(KindOf(o), o.taxonomy);
}

ordered_json FileRef(const std::string& path) {
  if (path.empty()) return nullptr;
  return {{"path", path}, {"sha256", Sha256File(path)}};
}

ordered_json ManifestHead(const std::string& command,
                          const std::vector<std::string>& args,
                          const CommonOptions& o) {
  ordered_json m;
  m["tool"] = "absa";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["argv"] = args;
  m["task"] = o.task;
  m["taxonomy"] = FileRef(o.taxonomy);
  m["seed"] = o.seed;
  m["jobs"] = o.jobs;
  return m;
}

void WriteManifest(const std::string& path, const ordered_json& manifest) {
  if (path.empty()) return;
  WriteFileAtomic(path, manifest.dump(2) + "\n");
}

std::vector<Example> LoadGold(const std::string& path, const TaskSpec& spec,
                              bool lenient, std::ostream& err) {
  ParseOptions options;
  options.grounding = lenient ? Grounding::kWarn : Grounding::kStrict;
  DatasetFile file = ParseDataset(path, spec, options);
  for (const std::string& w : file.warnings) {
    err << "warning: " << path << ": " << w << "\n";
  }
  return std::move(file.examples);
}

// ---------------------------------------------------------------- annotate

struct AnnotateFlags {
  CommonOptions common;
  std::string train;
  std::string unlabeled;
  std::size_t shots = 0;
  int m = 5;
  std::vector<std::int64_t> seeds;
  int max_regenerations = 10;
  std::string template_path;
  std::string endpoint;
  std::string replay;
  std::string mock;
  std::string record;
  std::string model = "gemma3:27b";
  double temperature = 0.8;
  int timeout_ms = 120000;
  int max_attempts = 5;
  int backoff_ms = 500;
  int max_in_flight = 4;
  bool no_send_seed = false;
  bool fail_fast = false;
  bool lenient = false;
  std::size_t limit = 0;
  std::string out_annotations;
  std::string out_train;
  std::string meter_out;
};

void AddAnnotate(CLI::App* app, AnnotateFlags* f) {
  auto* cmd = app->add_subcommand(
      "annotate", "label unlabeled sentences with an LLM and majority voting");
  AddCommon(cmd, &f->common, true);
  cmd->add_option("--train", f->train,
                  "gold training split; few-shot examples are drawn from it")
      ->required();
  cmd->add_option("--unlabeled", f->unlabeled,
                  "sentences to annotate (default: --train minus the shots)");
  cmd->add_option("--shots", f->shots, "number of few-shot examples")
      ->capture_default_str();
  cmd->add_option("--m", f->m, "runs per sentence for majority voting")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seeds", f->seeds, "run seeds (default 1..m)")
      ->delimiter(',');
  cmd->add_option("--max-regenerations", f->max_regenerations,
                  "generation attempts per run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--template", f->template_path, "prompt template asset");
  auto* endpoint = cmd->add_option("--endpoint", f->endpoint,
                                   "OpenAI-compatible base URL "
                                   "(default: $ABSA_ENDPOINT_URL)");
  auto* replay = cmd->add_option("--replay", f->replay, "replay cassette");
  auto* mock = cmd->add_option("--mock", f->mock, "scripted mock (JSON)");
  endpoint->excludes(replay)->excludes(mock);
  replay->excludes(mock);
  cmd->add_option("--record", f->record,
                  "save every answer to this cassette")->excludes(replay);
  cmd->add_option("--model", f->model)->envname("ABSA_MODEL")->capture_default_str();
  cmd->add_option("--temperature", f->temperature)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--timeout-ms", f->timeout_ms)->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-attempts", f->max_attempts,
                  "transport attempts per request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--backoff-ms", f->backoff_ms, "initial retry backoff")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--max-in-flight", f->max_in_flight)
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  cmd->add_flag("--no-send-seed", f->no_send_seed,
                "omit the seed field from requests");
  cmd->add_flag("--fail-fast", f->fail_fast,
                "abort on the first transport failure");
  cmd->add_flag("--lenient", f->lenient,
                "warn instead of failing on ungrounded phrases in --train");
  cmd->add_option("--limit", f->limit, "annotate at most N sentences (0: all)");
  cmd->add_option("--out-annotations", f->out_annotations,
                  "annotation records (JSON Lines)")
      ->required();
  cmd->add_option("--out-train", f->out_train,
                  "training file: LLM labels followed by the gold shots");
  cmd->add_option("--meter-out", f->meter_out, "per-sentence timing log");
}

int RunAnnotate(const AnnotateFlags& f, const std::vector<std::string>& args,
                std::ostream& out, std::ostream& err) {
  const double started = UnixNow();
  const TaskSpec spec = LoadTaskSpec(KindOf(f.common), f.common.taxonomy);
  DatasetFile train_file = [&] {
    ParseOptions options;
    options.grounding = f.lenient ? Grounding::kWarn : Grounding::kStrict;
    return ParseDataset(f.train, spec, options);
  }();
  for (const std::string& w : train_file.warnings) {
    err << "warning: " << f.train << ": " << w << "\n";
  }

  const std::vector<std::size_t> shot_indices =
      SampleIndices(train_file.examples.size(), f.shots, f.common.seed);
  std::vector<Example> shots;
  for (std::size_t i : shot_indices) shots.push_back(train_file.examples[i]);

  std::vector<std::string> sentences =
      f.unlabeled.empty() ? UnlabeledPool(train_file.examples, shot_indices)
                          : ReadSentences(f.unlabeled);
  if (f.limit > 0 && sentences.size() > f.limit) sentences.resize(f.limit);

  std::vector<std::int64_t> seeds = f.seeds;
  if (seeds.empty()) {
    for (int s = 1; s <= f.m; ++s) seeds.push_back(s);
  }
  if (seeds.size() != static_cast<std::size_t>(f.m)) {
    throw UsageError("--seeds must list exactly m=" + std::to_string(f.m) +
                     " seeds");
  }

  const std::string template_path = f.template_path.empty()
                                        ? DefaultPromptTemplatePath().string()
                                        : f.template_path;
  const PromptTemplate tmpl = LoadPromptTemplate(template_path, spec);

  EndpointConfig endpoint;
  endpoint = ApplyEndpointEnvironment(endpoint);
  if (!f.endpoint.empty()) endpoint.base_url = f.endpoint;
  endpoint.model = f.model;
  endpoint.temperature = f.temperature;
  endpoint.seed = seeds.front();
  endpoint.send_seed = !f.no_send_seed;
  endpoint.timeout = std::chrono::milliseconds(f.timeout_ms);
  endpoint.max_attempts = f.max_attempts;
  endpoint.initial_backoff = std::chrono::milliseconds(f.backoff_ms);
  endpoint.max_in_flight = f.max_in_flight;
  endpoint.Validate();

  std::unique_ptr<Backend> backend;
  std::string backend_name;
  if (!f.replay.empty()) {
    backend = std::make_unique<ReplayBackend>(
        std::make_shared<Cassette>(Cassette::Load(f.replay)));
  } else if (!f.mock.empty()) {
    backend = ScriptedBackend::Load(f.mock);
  } else {
    backend = std::make_unique<HttpBackend>(endpoint);
  }
  backend_name = backend->Name();
  Cassette recorded;
  std::unique_ptr<RecordingBackend> recorder;
  Backend* active = backend.get();
  if (!f.record.empty()) {
    recorder = std::make_unique<RecordingBackend>(*backend, recorded);
    active = recorder.get();
  }

  ValidationRules rules{spec, f.max_regenerations, true};
  MeterLog meter;
  AnnotateOptions options;
  options.seeds = seeds;
  options.vote.m = f.m;
  options.jobs = f.common.jobs;
  options.failure_policy = f.fail_fast ? FailurePolicy::kFailFast
                                       : FailurePolicy::kRecordAndContinue;
  options.model = endpoint.model;
  options.temperature = endpoint.temperature;
  options.meter = &meter;

  const double window_start = UnixNow();
  AnnotateResult result;
  try {
    result = AnnotateDataset(sentences, shots, tmpl, *active, rules, options);
  } catch (...) {
    if (!f.record.empty()) recorded.Save(f.record);
    throw;
  }
  meter.SetWindow(Phase::kAnnotate, PhaseWindow{window_start, UnixNow()});

  WriteAnnotations(result.records, f.out_annotations);
  if (!f.out_train.empty()) {
    WriteDataset(AssembleTrainingSet(result.records, shots), spec, f.out_train);
  }
  if (!f.record.empty()) recorded.Save(f.record);
  if (!f.meter_out.empty()) WriteFileAtomic(f.meter_out, meter.ToJson() + "\n");

  const auto failed = std::count_if(result.records.begin(), result.records.end(),
                                    [](const AnnotationRecord& r) { return r.failed(); });
  out << "annotated " << result.records.size() << " sentences ("
      << failed << " failed), " << result.generation_calls
      << " generation calls\n";

  if (!f.common.manifest_out.empty()) {
    ordered_json m = ManifestHead("annotate", args, f.common);
    m["inputs"] = {{"train", FileRef(f.train)},
                   {"unlabeled", FileRef(f.unlabeled)}};
    m["shots"] = f.shots;
    m["few_shot_indices"] = shot_indices;
    m["m"] = f.m;
    m["seeds"] = seeds;
    m["max_regenerations"] = f.max_regenerations;
    m["alpha"] = nullptr;
    m["backend"] = backend_name;
    m["cassette"] = FileRef(f.replay);
    m["mock_script"] = FileRef(f.mock);
    m["endpoint"] = {{"base_url", endpoint.base_url},
                     {"model", endpoint.model},
                     {"temperature", endpoint.temperature},
                     {"send_seed", endpoint.send_seed},
                     {"timeout_ms", endpoint.timeout.count()},
                     {"max_attempts", endpoint.max_attempts},
                     {"initial_backoff_ms", endpoint.initial_backoff.count()},
                     {"max_in_flight", endpoint.max_in_flight},
                     {"digest", endpoint.Digest()}};
    m["template"] = FileRef(template_path);
    m["lexicon"] = nullptr;
    m["failure_policy"] = f.fail_fast ? "fail-fast" : "record-and-continue";
    m["outputs"] = {{"annotations", f.out_annotations},
                    {"train", f.out_train},
                    {"record", f.record},
                    {"meter", f.meter_out}};
    m["counts"] = {{"sentences", result.records.size()},
                   {"failed", failed},
                   {"generation_calls", result.generation_calls}};
    m["started_at"] = FormatIso8601(started);
    m["finished_at"] = FormatIso8601(UnixNow());
    WriteManifest(f.common.manifest_out, m);
  }
  return 0;
}

// ------------------------------------------------------------ export-train

struct ExportFlags {
  CommonOptions common;
  std::string annotations;
  std::string gold;
  std::string train;
  std::size_t shots = 0;
  std::string out;
};

void AddExport(CLI::App* app, ExportFlags* f) {
  auto* cmd = app->add_subcommand(
      "export-train", "build a training file from annotation records");
  AddCommon(cmd, &f->common, true);
  cmd->add_option("--annotations", f->annotations, "annotation records")
      ->required();
  auto* gold = cmd->add_option("--gold", f->gold,
                               "gold examples to append (dataset format)");
  auto* train = cmd->add_option(
      "--train", f->train,
      "redraw the gold shots from this split with --shots and --seed");
  gold->excludes(train);
  cmd->add_option("--shots", f->shots)->needs(train);
  cmd->add_option("--out", f->out, "training file")->required();
}

int RunExport(const ExportFlags& f, const std::vector<std::string>& args,
              std::ostream& out, std::ostream& err) {
  const double started = UnixNow();
  const TaskSpec spec = LoadTaskSpec(KindOf(f.common), f.common.taxonomy);
  const auto records = ReadAnnotations(f.annotations, spec.kind());
  std::vector<Example> gold;
  if (!f.gold.empty()) gold = LoadGold(f.gold, spec, false, err);
  if (!f.train.empty()) {
    const DatasetFile train = ParseDataset(f.train, spec);
    gold = SampleFewShot(train, f.shots, f.common.seed);
  }
  const std::vector<Example> examples = AssembleTrainingSet(records, gold);
  WriteDataset(examples, spec, f.out);
  out << "wrote " << examples.size() << " examples to " << f.out << "\n";
  ordered_json m = ManifestHead("export-train", args, f.common);
  m["inputs"] = {{"annotations", FileRef(f.annotations)},
                 {"gold", FileRef(f.gold)},
                 {"train", FileRef(f.train)}};
  m["shots"] = f.shots;
  m["outputs"] = {{"train", f.out}};
  m["started_at"] = FormatIso8601(started);
  m["finished_at"] = FormatIso8601(UnixNow());
  WriteManifest(f.common.manifest_out, m);
  return 0;
}

// ----------------------------------------------------------------- augment

struct AugmentFlags {
  CommonOptions common;
  std::string train;
  std::size_t shots = 0;
  std::uint64_t sample_seed = 0;
  int alpha = 10;
  std::string lexicon;
  std::string out;
  bool lenient = false;
};

void AddAugment(CLI::App* app, AugmentFlags* f) {
  auto* cmd = app->add_subcommand(
      "augment", "term-aware EDA: originals plus alpha copies per example");
  AddCommon(cmd, &f->common, false);
  cmd->add_option("--train", f->train, "gold examples")->required();
  cmd->add_option("--shots", f->shots,
                  "first draw this many examples from --train (0: use all)");
  cmd->add_option("--sample-seed", f->sample_seed, "seed for --shots")
      ->capture_default_str();
  cmd->add_option("--alpha", f->alpha, "augmentations per example")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lexicon", f->lexicon, "synonym lexicon (TSV)");
  cmd->add_option("--out", f->out, "augmented training file")->required();
  cmd->add_flag("--lenient", f->lenient,
                "warn instead of failing on ungrounded phrases");
}

int RunAugment(const AugmentFlags& f, const std::vector<std::string>& args,
               std::ostream& out, std::ostream& err) {
  const double started = UnixNow();
  const TaskSpec spec = SpecOf(f.common);
  ParseOptions parse_options;
  parse_options.strict_taxonomy = !f.common.taxonomy.empty();
  parse_options.grounding = f.lenient ? Grounding::kWarn : Grounding::kStrict;
  DatasetFile train = ParseDataset(f.train, spec, parse_options);
  for (const std::string& w : train.warnings) {
    err << "warning: " << f.train << ": " << w << "\n";
  }
  std::vector<Example> gold = train.examples;
  if (f.shots > 0) gold = SampleFewShot(train, f.shots, f.sample_seed);

  const std::string lexicon_path =
      f.lexicon.empty() ? DefaultLexiconPath().string() : f.lexicon;
  const LexiconSynonyms lexicon = LexiconSynonyms::Load(lexicon_path);
  AugmentConfig config;
  config.alpha = f.alpha;
  config.seed = f.common.seed;
  const AugmentOutcome outcome = AugmentDataset(gold, config, lexicon);
  for (std::size_t i : outcome.skipped) {
    err << "warning: skipped example " << i + 1
        << " (term not locatable at token level): " << gold[i].text << "\n";
  }

  std::vector<Example> combined = gold;
  combined.insert(combined.end(), outcome.augmented.begin(),
                  outcome.augmented.end());
  WriteDataset(combined, spec, f.out);
  out << "wrote " << combined.size() << " examples (" << gold.size()
      << " original, " << outcome.augmented.size() << " augmented) to "
      << f.out << "\n";

  ordered_json m = ManifestHead("augment", args, f.common);
  m["inputs"] = {{"train", FileRef(f.train)}};
  m["shots"] = f.shots;
  m["sample_seed"] = f.sample_seed;
  m["alpha"] = f.alpha;
  m["lexicon"] = FileRef(lexicon_path);
  m["skipped"] = outcome.skipped;
  m["outputs"] = {{"train", f.out}};
  m["counts"] = {{"original", gold.size()},
                 {"augmented", outcome.augmented.size()},
                 {"total", combined.size()}};
  m["started_at"] = FormatIso8601(started);
  m["finished_at"] = FormatIso8601(UnixNow());
  WriteManifest(f.common.manifest_out, m);
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalFlags {
  CommonOptions common;
  std::string gold;
  std::string pred;
  std::string grouping = "category";
  std::string json_out;
};

void AddEval(CLI::App* app, EvalFlags* f) {
  auto* cmd = app->add_subcommand("eval", "exact-match micro/macro scores");
  AddCommon(cmd, &f->common, false);
  cmd->add_option("--gold", f->gold, "gold dataset file")->required();
  cmd->add_option("--pred", f->pred, "predictions, same line format")
      ->required();
  cmd->add_option("--macro-by", f->grouping, "macro grouping")
      ->check(CLI::IsMember({"category", "category-polarity"}))
      ->capture_default_str();
  cmd->add_option("--json-out", f->json_out, "report as JSON");
}

int RunEval(const EvalFlags& f, const std::vector<std::string>& args,
            std::ostream& out, std::ostream& err) {
  const double started = UnixNow();
  const TaskSpec spec = SpecOf(f.common);
  ParseOptions options;
  options.strict_taxonomy = !f.common.taxonomy.empty();
  options.grounding = Grounding::kWarn;
  const std::vector<Example> gold = ParseDataset(f.gold, spec, options).examples;
  // Predictions are scored as produced; categories outside the taxonomy
  // simply never match.
  options.strict_taxonomy = false;
  const std::vector<Example> pred = ParseDataset(f.pred, spec, options).examples;
  const EvalReport report =
      Score(gold, pred, spec,
            f.grouping == "category" ? MacroGrouping::kCategory
                                     : MacroGrouping::kCategoryPolarity);
  out << report.ToTable();
  if (!f.json_out.empty()) WriteFileAtomic(f.json_out, report.ToJson() + "\n");
  (void)err;
  ordered_json m = ManifestHead("eval", args, f.common);
  m["inputs"] = {{"gold", FileRef(f.gold)}, {"pred", FileRef(f.pred)}};
  m["outputs"] = {{"report", f.json_out}};
  m["micro_f1"] = report.micro_f1;
  m["started_at"] = FormatIso8601(started);
  m["finished_at"] = FormatIso8601(UnixNow());
  WriteManifest(f.common.manifest_out, m);
  return 0;
}

// ------------------------------------------------------------------- stats

struct StatsFlags {
  CommonOptions common;
  std::vector<std::string> meters;
  std::vector<std::string> labels;
  std::string trace;
  std::string phase = "auto";
  double horizon = 100000;
  std::size_t points = 101;
  std::string time_csv;
  std::string energy_csv;
  std::string json_out;
  bool reference = false;
  std::optional<std::size_t> reference_shots;
};

void AddStats(CLI::App* app, StatsFlags* f) {
  auto* cmd = app->add_subcommand(
      "stats", "cumulative time/energy curves and their crossovers");
  AddCommon(cmd, &f->common, false);
  cmd->add_option("--meter", f->meters, "timing log (repeatable, one curve each)");
  cmd->add_option("--label", f->labels, "curve label per --meter");
  cmd->add_option("--trace", f->trace, "power trace CSV (timestamp,watts)");
  cmd->add_option("--per-sample-phase", f->phase,
                  "phase that scales with n (auto: predict if present, else "
                  "annotate)")
      ->check(CLI::IsMember({"auto", "annotate", "train", "predict"}))
      ->capture_default_str();
  cmd->add_option("--horizon", f->horizon, "largest n")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--points", f->points, "rows per curve")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  cmd->add_option("--time-csv", f->time_csv, "cumulative seconds per curve");
  cmd->add_option("--energy-csv", f->energy_csv, "cumulative Wh per curve");
  cmd->add_option("--json-out", f->json_out, "curves and crossovers as JSON");
  cmd->add_flag("--reference", f->reference,
                "add the published per-sample energy figures as curves");
  cmd->add_option("--reference-shots", f->reference_shots,
                  "only reference rows with this shot count");
}

int RunStats(const StatsFlags& f, const std::vector<std::string>& args,
             std::ostream& out, std::ostream& err) {
  (void)err;
  const double started = UnixNow();
  if (f.meters.empty() && !f.reference) {
    throw UsageError("stats needs at least one --meter or --reference");
  }
  if (!f.labels.empty() && f.labels.size() != f.meters.size()) {
    throw UsageError("give one --label per --meter");
  }
  std::optional<std::vector<PowerSample>> trace;
  if (!f.trace.empty()) trace = LoadPowerTrace(f.trace);

  std::vector<CostCurve> time_curves;
  std::vector<CostCurve> energy_curves;
  ordered_json logs = ordered_json::array();
  for (std::size_t i = 0; i < f.meters.size(); ++i) {
    MeterLog log = MeterLog::FromJson(ReadFile(f.meters[i]));
    const std::string label =
        f.labels.empty() ? fs::path(f.meters[i]).stem().string() : f.labels[i];
    Phase phase = Phase::kPredict;
    if (f.phase == "auto") {
      if (log.Count(Phase::kPredict) == 0) phase = Phase::kAnnotate;
    } else {
      phase = *ParsePhase(f.phase);
    }
    CostCurve time = TimeCurve(log, phase);
    time.label = label;
    time_curves.push_back(time);
    ordered_json entry = {{"label", label},
                          {"per_sample_phase", std::string(ToString(phase))},
                          {"time", {{"intercept_s", time.intercept},
                                    {"slope_s", time.slope}}}};
    if (trace) {
      log.SetPowerTrace(*trace);
      const EnergyReport report = ComputeEnergyReport(log, phase);
      CostCurve energy = report.energy_wh;
      energy.label = label;
      energy_curves.push_back(energy);
      ordered_json phases = ordered_json::array();
      for (const PhaseEnergy& p : report.phases) {
        phases.push_back({{"phase", std::string(ToString(p.phase))},
                          {"seconds", p.seconds},
                          {"wh", p.watt_hours()},
                          {"samples", p.samples},
                          {"mwh_per_sample", p.mwh_per_sample}});
      }
      entry["energy"] = {{"intercept_wh", energy.intercept},
                         {"slope_wh", energy.slope},
                         {"phases", phases}};
    }
    logs.push_back(entry);
  }

  if (f.reference) {
    const TaskKind kind = KindOf(f.common);
    for (const ReferenceCost& ref :
         LoadReferenceCosts(DefaultReferenceCostsPath())) {
      if (ref.task != kind) continue;
      if (f.reference_shots && ref.shots != *f.reference_shots) continue;
      energy_curves.push_back(CostCurve{
          "published:" + ref.method + ":" + std::string(ToString(ref.task)) +
              ":" + std::to_string(ref.shots) + "shot",
          0.0, ref.mean_mwh / 1000.0});
    }
  }

  auto crossovers = [](const std::vector<CostCurve>& curves) {
    ordered_json list = ordered_json::array();
    for (std::size_t a = 0; a < curves.size(); ++a) {
      for (std::size_t b = a + 1; b < curves.size(); ++b) {
        const auto n = Crossover(curves[a], curves[b]);
        list.push_back({{"a", curves[a].label},
                        {"b", curves[b].label},
                        {"n", n ? ordered_json(*n) : ordered_json(nullptr)}});
      }
    }
    return list;
  };

  ordered_json report = {{"horizon", f.horizon}, {"logs", logs}};
  auto curve_json = [](const std::vector<CostCurve>& curves) {
    ordered_json list = ordered_json::array();
    for (const CostCurve& c : curves) {
      list.push_back({{"label", c.label},
                      {"intercept", c.intercept},
                      {"slope", c.slope}});
    }
    return list;
  };
  report["time_curves"] = curve_json(time_curves);
  report["time_crossovers"] = crossovers(time_curves);
  report["energy_curves"] = curve_json(energy_curves);
  report["energy_crossovers"] = crossovers(energy_curves);

  if (!f.time_csv.empty() && !time_curves.empty()) {
    WriteFileAtomic(f.time_csv, CurvesCsv(time_curves, f.horizon, f.points));
  }
  if (!f.energy_csv.empty() && !energy_curves.empty()) {
    WriteFileAtomic(f.energy_csv, CurvesCsv(energy_curves, f.horizon, f.points));
  }
  if (!f.json_out.empty()) WriteFileAtomic(f.json_out, report.dump(2) + "\n");

  for (const CostCurve& c : time_curves) {
    out << "time   " << c.label << ": " << c.intercept << " s + " << c.slope
        << " s/sample\n";
  }
  for (const CostCurve& c : energy_curves) {
    out << "energy " << c.label << ": " << c.intercept << " Wh + "
        << c.slope * 1000.0 << " mWh/sample\n";
  }
  for (const auto& x : report["energy_crossovers"]) {
    if (!x["n"].is_null()) {
      out << "energy crossover " << x["a"].get<std::string>() << " / "
          << x["b"].get<std::string>() << " at n=" << x["n"].get<double>()
          << "\n";
    }
  }

  ordered_json m = ManifestHead("stats", args, f.common);
  ordered_json inputs = ordered_json::array();
  for (const std::string& p : f.meters) inputs.push_back(FileRef(p));
  m["inputs"] = {{"meters", inputs}, {"trace", FileRef(f.trace)}};
  m["outputs"] = {{"time_csv", f.time_csv},
                  {"energy_csv", f.energy_csv},
                  {"json", f.json_out}};
  m["started_at"] = FormatIso8601(started);
  m["finished_at"] = FormatIso8601(UnixNow());
  WriteManifest(f.common.manifest_out, m);
  return 0;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Pseudo-labeling, augmentation and evaluation for "
               "aspect-based sentiment tuples",
               "absa"};
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "TOML config file ([subcommand] sections)");
  app.require_subcommand(1);

  AnnotateFlags annotate;
  ExportFlags export_train;
  AugmentFlags augment;
  EvalFlags eval;
  StatsFlags stats;
  AddAnnotate(&app, &annotate);
  AddExport(&app, &export_train);
  AddAugment(&app, &augment);
  AddEval(&app, &eval);
  AddStats(&app, &stats);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (app.got_subcommand("annotate")) return RunAnnotate(annotate, args, out, err);
    if (app.got_subcommand("export-train")) {
      return RunExport(export_train, args, out, err);
    }
    if (app.got_subcommand("augment")) return RunAugment(augment, args, out, err);
    if (app.got_subcommand("eval")) return RunEval(eval, args, out, err);
    if (app.got_subcommand("stats")) return RunStats(stats, args, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace absa
