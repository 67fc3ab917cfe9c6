// Copyright 2026 The amla-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMLA_REPORTS_HPP_
#define AMLA_REPORTS_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amla/attention.hpp"
#include "amla/perf_model.hpp"
#include "amla/preload.hpp"

namespace amla {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Embedded in every output so a result file identifies the run that made it.
// Reruns with equal parameters produce byte-identical output except for the
// timestamp line.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> parameters;
  uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string timestamp;

  static RunManifest make(std::string command,
                          std::map<std::string, std::string> parameters,
                          uint64_t seed);
};

std::string accuracy_report_json(const AccuracyReport& report,
                                 const RunManifest& manifest);
// One column per distribution, one row per (metric, method).
std::string accuracy_report_csv(const AccuracyReport& report,
                                const RunManifest& manifest);

struct ScheduleReport {
  CvChain chain;
  CycleSchedule schedule;
  Timeline timeline;
  int oracle_max = -1;  // negative when the exhaustive check was skipped
};
std::string schedule_report_json(const ScheduleReport& report,
                                 const RunManifest& manifest);
std::string schedule_report_csv(const ScheduleReport& report,
                                const RunManifest& manifest);

struct RooflineRow {
  std::string label;
  WorkloadSpec workload;
  double flops = 0.0;
  double kv_bytes = 0.0;
  RooflineResult roofline;
  int64_t expected_intensity = 0;   // 0 when there is no reference value
  double duration_us = 0.0;         // 0 when untimed
  double utilization_pct = 0.0;
  double expected_util_pct = 0.0;
};
struct RooflineReportData {
  HardwareProfile hw;
  std::vector<RooflineRow> rows;
};
std::string roofline_report_json(const RooflineReportData& report,
                                 const RunManifest& manifest);
std::string roofline_report_csv(const RooflineReportData& report,
                                const RunManifest& manifest);

struct TilingReportData {
  TilingConfig config;
  HardwareProfile hw;
  TilingReport report;
  int64_t min_m = 0;
};
std::string tiling_report_json(const TilingReportData& report,
                               const RunManifest& manifest);
std::string tiling_report_csv(const TilingReportData& report,
                              const RunManifest& manifest);

}  // namespace amla

#endif  // AMLA_REPORTS_HPP_
