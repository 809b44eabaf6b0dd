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

// Time and energy bookkeeping for annotation, training and prediction.
//
// Durations come from a monotonic clock. Energy is never measured here: it
// is the integral of an externally supplied power trace over each phase's
// wall-clock window.

#ifndef ABSA_METERING_H_
#define ABSA_METERING_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absa/types.h"

namespace absa {

enum class Phase { kAnnotate, kTrain, kPredict };

std::string_view ToString(Phase phase);
std::optional<Phase> ParsePhase(std::string_view text);

// Wall-clock time as Unix seconds.
double UnixNow();
// "2026-10-15T08:30:00.125Z" (UTC, millisecond precision).
std::string FormatIso8601(double unix_seconds);
// Accepts YYYY-MM-DDTHH:MM:SS[.fraction][Z|+HH:MM|-HH:MM]; no zone means
// UTC. Throws ParseError.
double ParseIso8601(std::string_view text);

struct SampleTiming {
  std::size_t index = 0;
  Phase phase = Phase::kAnnotate;
  double seconds = 0;
};

struct PhaseWindow {
  double start = 0;  // Unix seconds
  double end = 0;
};

struct PowerSample {
  double time = 0;  // Unix seconds
  double watts = 0;
};

// Append-only timing log. Record() may be called from several threads.
class MeterLog {
 public:
  MeterLog() = default;
  MeterLog(const MeterLog& other);
  MeterLog& operator=(const MeterLog& other);

  // Throws UsageError on a negative duration.
  void Record(Phase phase, std::size_t index, double seconds);
  void Record(Phase phase, std::size_t index,
              std::chrono::nanoseconds duration);

  void SetWindow(Phase phase, PhaseWindow window);
  // Marks `phase` as a one-off cost (e.g. fine-tuning) that shifts the
  // cumulative curves instead of scaling with the number of samples.
  void SetOverhead(Phase phase, double seconds);
  // Timestamps must be strictly increasing; throws UsageError otherwise.
  void SetPowerTrace(std::vector<PowerSample> trace);

  double TotalSeconds(Phase phase) const;
  double TotalSeconds() const;
  std::size_t Count(Phase phase) const;

  std::vector<SampleTiming> samples() const;
  std::map<Phase, PhaseWindow> windows() const;
  std::map<Phase, double> overheads() const;
  const std::optional<std::vector<PowerSample>>& power_trace() const {
    return power_trace_;
  }

  // JSON: {"samples": [{"index", "phase", "seconds"}],
  //        "windows": {phase: {"start", "end"}},
  //        "fixed_overheads": {phase: seconds}}
  // The power trace travels separately as CSV.
  std::string ToJson() const;
  static MeterLog FromJson(std::string_view text);

 private:
  mutable std::mutex mu_;
  std::vector<SampleTiming> samples_;
  std::map<Phase, PhaseWindow> windows_;
  std::map<Phase, double> overheads_;
  std::optional<std::vector<PowerSample>> power_trace_;
};

// Power trace CSV: "timestamp_iso8601,watts" rows, optional header row.
std::vector<PowerSample> ParsePowerTraceCsv(std::string_view text);
std::vector<PowerSample> LoadPowerTrace(const std::filesystem::path& path);

// Trapezoidal integral of power over [start, end] in joules, linearly
// interpolating at the window edges. Throws Error if the trace does not
// cover the window.
double IntegratePower(std::span<const PowerSample> trace, double start,
                      double end);

inline constexpr double kJoulesPerWattHour = 3600.0;

// Cost as an affine function of the number of processed samples.
struct CostCurve {
  std::string label;
  double intercept = 0;
  double slope = 0;

  double At(double n) const { return intercept + slope * n; }
};

// n where the two curves meet, or nullopt for parallel lines.
std::optional<double> Crossover(const CostCurve& a, const CostCurve& b);

struct PhaseEnergy {
  Phase phase = Phase::kAnnotate;
  double seconds = 0;  // window length
  double joules = 0;
  std::size_t samples = 0;
  // 0 when the phase has no samples.
  double mwh_per_sample = 0;

  double watt_hours() const { return joules / kJoulesPerWattHour; }
};

struct EnergyReport {
  std::vector<PhaseEnergy> phases;
  Phase per_sample_phase = Phase::kPredict;
  double overhead_wh = 0;
  double per_sample_mwh = 0;
  // Cumulative watt-hours after n samples.
  CostCurve energy_wh;
};

// Integrates every phase that has a window. Overhead phases (see
// MeterLog::SetOverhead) form the curve intercept; `per_sample_phase`
// supplies the slope. Throws Error without a power trace.
EnergyReport ComputeEnergyReport(const MeterLog& log,
                                 Phase per_sample_phase = Phase::kPredict);

// Cumulative seconds after n samples: overhead durations plus the mean
// per-sample duration of `per_sample_phase` times n.
CostCurve TimeCurve(const MeterLog& log,
                    Phase per_sample_phase = Phase::kPredict);

// CSV with a header "n,<label>,..." and `points` evenly spaced rows from 0
// to horizon inclusive.
std::string CurvesCsv(std::span<const CostCurve> curves, double horizon,
                      std::size_t points);

struct ReferenceCost {
  std::string method;
  TaskKind task = TaskKind::kTasd;
  std::size_t shots = 0;
  double mean_mwh = 0;
  double sd_mwh = 0;
};

// Published per-sample energy figures shipped as assets/reference_energy.json.
std::vector<ReferenceCost> LoadReferenceCosts(
    const std::filesystem::path& path);
std::filesystem::path DefaultReferenceCostsPath();

}  // namespace absa

#endif  // ABSA_METERING_H_
