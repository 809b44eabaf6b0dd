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

#include "absa/metering.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "absa/dataset_io.h"
#include "json.hpp"

namespace absa {
namespace {

using json = nlohmann::json;

bool ParseDigits(std::string_view text, std::size_t pos, std::size_t count,
                 int* out) {
  if (pos + count > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
    value = value * 10 + (text[i] - '0');
  }
  *out = value;
  return true;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

double Interpolate(const PowerSample& a, const PowerSample& b, double t) {
  if (b.time == a.time) return a.watts;
  return a.watts + (b.watts - a.watts) * (t - a.time) / (b.time - a.time);
}

}  // namespace

std::string_view ToString(Phase phase) {
  switch (phase) {
    case Phase::kAnnotate:
      return "annotate";
    case Phase::kTrain:
      return "train";
    case Phase::kPredict:
      return "predict";
  }
  return "";
}

std::optional<Phase> ParsePhase(std::string_view text) {
  for (Phase p : {Phase::kAnnotate, Phase::kTrain, Phase::kPredict}) {
    if (ToString(p) == text) return p;
  }
  return std::nullopt;
}

double UnixNow() {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

std::string FormatIso8601(double unix_seconds) {
  const auto millis = static_cast<std::int64_t>(std::llround(unix_seconds * 1000));
  std::int64_t secs = millis / 1000;
  std::int64_t ms = millis % 1000;
  if (ms < 0) {
    ms += 1000;
    --secs;
  }
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

double ParseIso8601(std::string_view text) {
  text = Trim(text);
  auto fail = [&]() -> double {
    throw ParseError("bad ISO 8601 timestamp: " + std::string(text), 0, 0);
  };
  int year, month, day, hour, minute, second;
  if (!ParseDigits(text, 0, 4, &year) || text.size() < 19 || text[4] != '-' ||
      !ParseDigits(text, 5, 2, &month) || text[7] != '-' ||
      !ParseDigits(text, 8, 2, &day) || (text[10] != 'T' && text[10] != ' ') ||
      !ParseDigits(text, 11, 2, &hour) || text[13] != ':' ||
      !ParseDigits(text, 14, 2, &minute) || text[16] != ':' ||
      !ParseDigits(text, 17, 2, &second)) {
    return fail();
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 ||
      minute > 59 || second > 60) {
    return fail();
  }
  std::size_t pos = 19;
  double fraction = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    double scale = 0.1;
    const std::size_t digits_start = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      fraction += (text[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == digits_start) return fail();
  }
  int offset_seconds = 0;
  if (pos < text.size()) {
    if (text[pos] == 'Z' && pos + 1 == text.size()) {
      ++pos;
    } else if ((text[pos] == '+' || text[pos] == '-') &&
               pos + 6 == text.size() && text[pos + 3] == ':') {
      int oh, om;
      if (!ParseDigits(text, pos + 1, 2, &oh) ||
          !ParseDigits(text, pos + 4, 2, &om)) {
        return fail();
      }
      offset_seconds = (oh * 3600 + om * 60) * (text[pos] == '-' ? -1 : 1);
      pos += 6;
    } else {
      return fail();
    }
  }
  std::tm tm{};
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  const std::time_t t = timegm(&tm);
  return static_cast<double>(t) - offset_seconds + fraction;
}

MeterLog::MeterLog(const MeterLog& other) {
  std::lock_guard lock(other.mu_);
  samples_ = other.samples_;
  windows_ = other.windows_;
  overheads_ = other.overheads_;
  power_trace_ = other.power_trace_;
}

MeterLog& MeterLog::operator=(const MeterLog& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  samples_ = other.samples_;
  windows_ = other.windows_;
  overheads_ = other.overheads_;
  power_trace_ = other.power_trace_;
  return *this;
}

void MeterLog::Record(Phase phase, std::size_t index, double seconds) {
  if (!(seconds >= 0)) throw UsageError("negative duration");
  std::lock_guard lock(mu_);
  samples_.push_back(SampleTiming{index, phase, seconds});
}

void MeterLog::Record(Phase phase, std::size_t index,
                      std::chrono::nanoseconds duration) {
  Record(phase, index, std::chrono::duration<double>(duration).count());
}

void MeterLog::SetWindow(Phase phase, PhaseWindow window) {
  if (window.end < window.start) throw UsageError("window ends before start");
  std::lock_guard lock(mu_);
  windows_[phase] = window;
}

void MeterLog::SetOverhead(Phase phase, double seconds) {
  if (!(seconds >= 0)) throw UsageError("negative overhead");
  std::lock_guard lock(mu_);
  overheads_[phase] = seconds;
}

void MeterLog::SetPowerTrace(std::vector<PowerSample> trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (!(trace[i].time > trace[i - 1].time)) {
      throw UsageError("power trace timestamps must be strictly increasing");
    }
  }
  std::lock_guard lock(mu_);
  power_trace_ = std::move(trace);
}

double MeterLog::TotalSeconds(Phase phase) const {
  std::lock_guard lock(mu_);
  double total = 0;
  for (const SampleTiming& s : samples_) {
    if (s.phase == phase) total += s.seconds;
  }
  return total;
}

double MeterLog::TotalSeconds() const {
  std::lock_guard lock(mu_);
  double total = 0;
  for (const SampleTiming& s : samples_) total += s.seconds;
  return total;
}

std::size_t MeterLog::Count(Phase phase) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(samples_.begin(), samples_.end(),
                    [&](const SampleTiming& s) { return s.phase == phase; }));
}

std::vector<SampleTiming> MeterLog::samples() const {
  std::lock_guard lock(mu_);
  return samples_;
}

std::map<Phase, PhaseWindow> MeterLog::windows() const {
  std::lock_guard lock(mu_);
  return windows_;
}

std::map<Phase, double> MeterLog::overheads() const {
  std::lock_guard lock(mu_);
  return overheads_;
}

std::string MeterLog::ToJson() const {
  std::lock_guard lock(mu_);
  json samples = json::array();
  for (const SampleTiming& s : samples_) {
    samples.push_back({{"index", s.index},
                       {"phase", std::string(ToString(s.phase))},
                       {"seconds", s.seconds}});
  }
  json windows = json::object();
  for (const auto& [phase, w] : windows_) {
    windows[std::string(ToString(phase))] = {{"start", w.start},
                                             {"end", w.end}};
  }
  json overheads = json::object();
  for (const auto& [phase, seconds] : overheads_) {
    overheads[std::string(ToString(phase))] = seconds;
  }
  return json{{"samples", samples},
              {"windows", windows},
              {"fixed_overheads", overheads}}
      .dump(2);
}

MeterLog MeterLog::FromJson(std::string_view text) {
  MeterLog log;
  auto phase_of = [](const std::string& name) {
    const auto phase = ParsePhase(name);
    if (!phase) throw ParseError("unknown phase: " + name, 0, 0);
    return *phase;
  };
  try {
    const json value = json::parse(text);
    for (const json& s : value.value("samples", json::array())) {
      log.Record(phase_of(s.at("phase").get<std::string>()),
                 s.at("index").get<std::size_t>(),
                 s.at("seconds").get<double>());
    }
    const json windows = value.value("windows", json::object());
    for (const auto& [name, w] : windows.items()) {
      log.SetWindow(phase_of(name), PhaseWindow{w.at("start").get<double>(),
                                                w.at("end").get<double>()});
    }
    const json overheads = value.value("fixed_overheads", json::object());
    for (const auto& [name, seconds] : overheads.items()) {
      log.SetOverhead(phase_of(name), seconds.get<double>());
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad meter log: ") + e.what(), 0, 0);
  }
  return log;
}

std::vector<PowerSample> ParsePowerTraceCsv(std::string_view text) {
  std::vector<PowerSample> trace;
  std::size_t offset = 0;
  std::size_t line_number = 0;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    const std::size_t line_offset = offset;
    const std::string_view line = Trim(text.substr(offset, end - offset));
    offset = end + 1;
    ++line_number;
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("expected timestamp,watts", line_number, line_offset);
    }
    const std::string_view stamp = Trim(line.substr(0, comma));
    const std::string watts_text(Trim(line.substr(comma + 1)));
    if (line_number == 1 && !stamp.empty() &&
        !std::isdigit(static_cast<unsigned char>(stamp.front()))) {
      continue;  // header
    }
    PowerSample sample;
    try {
      sample.time = ParseIso8601(stamp);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_number, line_offset);
    }
    char* parse_end = nullptr;
    sample.watts = std::strtod(watts_text.c_str(), &parse_end);
    if (watts_text.empty() || *parse_end != '\0' || !(sample.watts >= 0)) {
      throw ParseError("bad watts value: " + watts_text, line_number,
                       line_offset + comma + 1);
    }
    if (!trace.empty() && !(sample.time > trace.back().time)) {
      throw ParseError("timestamps must be strictly increasing", line_number,
                       line_offset);
    }
    trace.push_back(sample);
  }
  return trace;
}

std::vector<PowerSample> LoadPowerTrace(const std::filesystem::path& path) {
  return ParsePowerTraceCsv(ReadFile(path));
}

double IntegratePower(std::span<const PowerSample> trace, double start,
                      double end) {
  if (end < start) throw UsageError("integration window ends before start");
  if (end == start) return 0;
  if (trace.size() < 2 || trace.front().time > start ||
      trace.back().time < end) {
    throw Error("power trace does not cover [" + FormatIso8601(start) + ", " +
                FormatIso8601(end) + "]");
  }
  double joules = 0;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    const PowerSample& a = trace[i];
    const PowerSample& b = trace[i + 1];
    const double lo = std::max(a.time, start);
    const double hi = std::min(b.time, end);
    if (hi <= lo) continue;
    joules += 0.5 * (Interpolate(a, b, lo) + Interpolate(a, b, hi)) * (hi - lo);
  }
  return joules;
}

std::optional<double> Crossover(const CostCurve& a, const CostCurve& b) {
  const double dslope = a.slope - b.slope;
  if (dslope == 0) return std::nullopt;
  return (b.intercept - a.intercept) / dslope;
}

EnergyReport ComputeEnergyReport(const MeterLog& log, Phase per_sample_phase) {
  if (!log.power_trace()) throw Error("energy report needs a power trace");
  const auto& trace = *log.power_trace();
  const auto overheads = log.overheads();

  EnergyReport report;
  report.per_sample_phase = per_sample_phase;
  for (const auto& [phase, window] : log.windows()) {
    PhaseEnergy energy;
    energy.phase = phase;
    energy.seconds = window.end - window.start;
    energy.joules = IntegratePower(trace, window.start, window.end);
    energy.samples = log.Count(phase);
    if (energy.samples > 0) {
      energy.mwh_per_sample =
          energy.watt_hours() * 1000.0 / static_cast<double>(energy.samples);
    }
    if (overheads.contains(phase)) report.overhead_wh += energy.watt_hours();
    if (phase == per_sample_phase) report.per_sample_mwh = energy.mwh_per_sample;
    report.phases.push_back(energy);
  }
  const auto windows = log.windows();
  for (const auto& entry : overheads) {
    const Phase phase = entry.first;
    if (!windows.contains(phase)) {
      throw Error("overhead phase " + std::string(ToString(phase)) +
                  " has no wall-clock window to integrate over");
    }
  }
  report.energy_wh = CostCurve{"energy_wh", report.overhead_wh,
                               report.per_sample_mwh / 1000.0};
  return report;
}

CostCurve TimeCurve(const MeterLog& log, Phase per_sample_phase) {
  CostCurve curve;
  curve.label = "seconds";
  for (const auto& [phase, seconds] : log.overheads()) curve.intercept += seconds;
  const std::size_t count = log.Count(per_sample_phase);
  if (count > 0) {
    curve.slope = log.TotalSeconds(per_sample_phase) / static_cast<double>(count);
  }
  return curve;
}

std::string CurvesCsv(std::span<const CostCurve> curves, double horizon,
                      std::size_t points) {
  if (points < 2) throw UsageError("need at least two curve points");
  std::ostringstream out;
  out.precision(17);
  out << "n";
  for (const CostCurve& c : curves) out << ',' << c.label;
  out << '\n';
  for (std::size_t i = 0; i < points; ++i) {
    const double n =
        horizon * static_cast<double>(i) / static_cast<double>(points - 1);
    out << n;
    for (const CostCurve& c : curves) out << ',' << c.At(n);
    out << '\n';
  }
  return out.str();
}

std::vector<ReferenceCost> LoadReferenceCosts(
    const std::filesystem::path& path) {
  std::vector<ReferenceCost> costs;
  try {
    const json value = json::parse(ReadFile(path));
    for (const json& e : value.at("entries")) {
      ReferenceCost cost;
      cost.method = e.at("method").get<std::string>();
      const auto task = ParseTaskKind(e.at("task").get<std::string>());
      if (!task) throw Error("bad task in reference costs");
      cost.task = *task;
      cost.shots = e.at("shots").get<std::size_t>();
      cost.mean_mwh = e.at("mean_mwh").get<double>();
      cost.sd_mwh = e.at("sd_mwh").get<double>();
      costs.push_back(std::move(cost));
    }
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return costs;
}

std::filesystem::path DefaultReferenceCostsPath() {
  return std::filesystem::path(ABSA_ASSET_DIR) / "reference_energy.json";
}

}  // namespace absa
