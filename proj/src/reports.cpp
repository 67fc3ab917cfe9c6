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

#include "amla/reports.hpp"

#include <cstdio>
#include <ctime>
#include <sstream>

#include "json.hpp"

namespace amla {
namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const char* unit_name(Unit u) { return u == Unit::kCube ? "cube" : "vector"; }

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::kPreload:
      return "preload";
    case Phase::kSteady:
      return "steady";
    default:
      return "drain";
  }
}

const char* kv_name(KvCache kv) {
  return kv == KvCache::kPerHead ? "per-head" : "shared-latent";
}

const char* comp_name(RescaleCompensation c) {
  return c == RescaleCompensation::kDerived ? "derived" : "algorithm-literal";
}

Json manifest_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["parameters"] = m.parameters;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["timestamp"] = m.timestamp;
  return j;
}

Json wrap(const char* kind, const RunManifest& m) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = kind;
  j["manifest"] = manifest_json(m);
  return j;
}

void manifest_csv(std::ostringstream& out, const RunManifest& m) {
  out << "# schema_version=" << kReportSchemaVersion << "\n";
  out << "# command=" << m.command << "\n";
  out << "# seed=" << m.seed << "\n";
  out << "# tool_version=" << m.tool_version << "\n";
  out << "# timestamp=" << m.timestamp << "\n";
  for (const auto& [k, v] : m.parameters)
    out << "# param." << k << "=" << v << "\n";
}

Json stats_json(const MethodStats& s) {
  Json j;
  j["mean"] = s.mean;
  j["min"] = s.min;
  j["max"] = s.max;
  j["samples"] = s.samples;
  return j;
}

Json workload_json(const WorkloadSpec& w) {
  Json j;
  j["batch"] = w.batch;
  j["n1"] = w.n1;
  j["n2"] = w.n2;
  j["s1"] = w.s1;
  j["s2"] = w.s2;
  j["dk"] = w.dk;
  j["dv"] = w.dv;
  j["kv_cache"] = kv_name(w.kv);
  return j;
}

}  // namespace

RunManifest RunManifest::make(std::string command,
                              std::map<std::string, std::string> parameters,
                              uint64_t seed) {
  RunManifest m;
  m.command = std::move(command);
  m.parameters = std::move(parameters);
  m.seed = seed;
  m.timestamp = iso_now();
  return m;
}

std::string accuracy_report_json(const AccuracyReport& report,
                                 const RunManifest& manifest) {
  Json j = wrap("accuracy", manifest);
  Json cfg;
  cfg["g"] = report.config.g;
  cfg["dk"] = report.config.dk;
  cfg["dv"] = report.config.dv;
  cfg["s2"] = report.config.s2;
  cfg["kv_block"] = report.config.kv_block;
  cfg["seed"] = report.config.seed;
  j["config"] = cfg;
  j["n_samples"] = report.n_samples;
  j["compensation"] = comp_name(report.compensation);
  Json rows = Json::array();
  for (const auto& r : report.results) {
    Json row;
    row["distribution"] = r.dist.label();
    row["base"] = stats_json(r.base);
    row["amla"] = stats_json(r.amla);
    rows.push_back(row);
  }
  j["results"] = rows;
  return j.dump(2) + "\n";
}

std::string accuracy_report_csv(const AccuracyReport& report,
                                const RunManifest& manifest) {
  std::ostringstream out;
  manifest_csv(out, manifest);
  out << "# n_samples=" << report.n_samples << "\n";
  out << "# compensation=" << comp_name(report.compensation) << "\n";
  out << "metric,method";
  for (const auto& r : report.results) out << "," << r.dist.label();
  out << "\n";
  const auto emit = [&](const char* metric, const char* method,
                        double MethodStats::*field) {
    out << metric << "," << method;
    for (const auto& r : report.results)
      out << ","
          << fmt((method[0] == 'b' ? r.base : r.amla).*field);
    out << "\n";
  };
  emit("mean", "base", &MethodStats::mean);
  emit("mean", "amla", &MethodStats::mean);
  emit("min", "base", &MethodStats::min);
  emit("min", "amla", &MethodStats::min);
  emit("max", "base", &MethodStats::max);
  emit("max", "amla", &MethodStats::max);
  return out.str();
}

std::string schedule_report_json(const ScheduleReport& report,
                                 const RunManifest& manifest) {
  Json j = wrap("schedule", manifest);
  Json chain;
  chain["cube"] = report.chain.cube;
  chain["vec"] = report.chain.vec;
  j["chain"] = chain;
  Json sch;
  sch["cube_order"] = report.schedule.cube_order;
  sch["vector_order"] = report.schedule.vector_order;
  sch["delta_cube"] = report.schedule.delta_cube;
  sch["delta_vec"] = report.schedule.delta_vec;
  sch["internal_edges"] = report.schedule.internal_edge_count();
  sch["preload_count"] = report.schedule.preload_count();
  j["schedule"] = sch;
  Json tl;
  tl["iterations"] = report.timeline.iterations;
  tl["makespan"] = report.timeline.makespan;
  tl["preload_makespan"] = report.timeline.preload_makespan;
  tl["steady_cycle_length"] = report.timeline.steady_cycle_length;
  tl["steady_stall"] = report.timeline.steady_stall;
  tl["steady_periodic"] = report.timeline.steady_periodic;
  Json events = Json::array();
  for (const auto& e : report.timeline.events) {
    Json ev;
    ev["unit"] = unit_name(e.unit);
    ev["stage"] = e.stage;
    ev["iteration"] = e.iteration;
    ev["cycle"] = e.cycle;
    ev["phase"] = phase_name(e.phase);
    ev["start"] = e.start;
    ev["end"] = e.end;
    events.push_back(ev);
  }
  tl["events"] = events;
  j["timeline"] = tl;
  if (report.oracle_max >= 0) j["oracle_max_internal"] = report.oracle_max;
  return j.dump(2) + "\n";
}

std::string schedule_report_csv(const ScheduleReport& report,
                                const RunManifest& manifest) {
  std::ostringstream out;
  manifest_csv(out, manifest);
  const auto join = [](const auto& v) {
    std::ostringstream s;
    for (size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  out << "# cube=" << join(report.chain.cube) << "\n";
  out << "# vec=" << join(report.chain.vec) << "\n";
  out << "# cube_order=" << join(report.schedule.cube_order) << "\n";
  out << "# vector_order=" << join(report.schedule.vector_order) << "\n";
  out << "# delta_cube=" << join(report.schedule.delta_cube) << "\n";
  out << "# delta_vec=" << join(report.schedule.delta_vec) << "\n";
  out << "# internal_edges=" << report.schedule.internal_edge_count() << "\n";
  out << "# preload_count=" << report.schedule.preload_count() << "\n";
  out << "# iterations=" << report.timeline.iterations << "\n";
  out << "# makespan=" << report.timeline.makespan << "\n";
  out << "# preload_makespan=" << report.timeline.preload_makespan << "\n";
  out << "# steady_cycle_length=" << report.timeline.steady_cycle_length
      << "\n";
  out << "# steady_stall=" << report.timeline.steady_stall << "\n";
  out << "# steady_periodic=" << (report.timeline.steady_periodic ? 1 : 0)
      << "\n";
  if (report.oracle_max >= 0)
    out << "# oracle_max_internal=" << report.oracle_max << "\n";
  out << "unit,stage,iteration,cycle,phase,start,end\n";
  for (const auto& e : report.timeline.events)
    out << unit_name(e.unit) << "," << e.stage << "," << e.iteration << ","
        << e.cycle << "," << phase_name(e.phase) << "," << e.start << ","
        << e.end << "\n";
  return out.str();
}

std::string roofline_report_json(const RooflineReportData& report,
                                 const RunManifest& manifest) {
  Json j = wrap("roofline", manifest);
  Json hw;
  hw["name"] = report.hw.name;
  hw["peak_flops"] = report.hw.peak_flops;
  hw["hbm_bandwidth"] = report.hw.hbm_bandwidth;
  j["hardware"] = hw;
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["label"] = r.label;
    row["workload"] = workload_json(r.workload);
    row["flops"] = r.flops;
    row["kv_bytes"] = r.kv_bytes;
    row["intensity"] = r.roofline.intensity;
    if (r.expected_intensity > 0)
      row["expected_intensity"] = r.expected_intensity;
    row["ridge"] = r.roofline.ridge;
    row["attainable_flops"] = r.roofline.attainable_flops;
    row["bound"] =
        r.roofline.bound == RooflineBound::kCompute ? "compute" : "memory";
    if (r.duration_us > 0.0) {
      row["duration_us"] = r.duration_us;
      row["utilization_pct"] = r.utilization_pct;
      if (r.expected_util_pct > 0.0)
        row["expected_util_pct"] = r.expected_util_pct;
    }
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string roofline_report_csv(const RooflineReportData& report,
                                const RunManifest& manifest) {
  std::ostringstream out;
  manifest_csv(out, manifest);
  out << "# hardware=" << report.hw.name << "\n";
  out << "# peak_flops=" << fmt(report.hw.peak_flops) << "\n";
  out << "# hbm_bandwidth=" << fmt(report.hw.hbm_bandwidth) << "\n";
  out << "label,batch,n1,n2,s1,s2,dk,dv,kv_cache,flops,kv_bytes,intensity,"
         "expected_intensity,ridge,attainable_flops,bound,duration_us,"
         "utilization_pct,expected_util_pct\n";
  for (const auto& r : report.rows) {
    const auto& w = r.workload;
    out << r.label << "," << w.batch << "," << w.n1 << "," << w.n2 << ","
        << w.s1 << "," << w.s2 << "," << w.dk << "," << w.dv << ","
        << kv_name(w.kv) << "," << fmt(r.flops) << "," << fmt(r.kv_bytes)
        << "," << fmt(r.roofline.intensity) << "," << r.expected_intensity
        << "," << fmt(r.roofline.ridge) << ","
        << fmt(r.roofline.attainable_flops) << ","
        << (r.roofline.bound == RooflineBound::kCompute ? "compute" : "memory")
        << "," << fmt(r.duration_us) << "," << fmt(r.utilization_pct) << ","
        << fmt(r.expected_util_pct) << "\n";
  }
  return out.str();
}

std::string tiling_report_json(const TilingReportData& report,
                               const RunManifest& manifest) {
  Json j = wrap("tiling", manifest);
  j["config"] = Json::parse(report.config.to_json());
  Json hw;
  hw["name"] = report.hw.name;
  hw["l1_bytes"] = report.hw.l1_bytes;
  hw["l0a_bytes"] = report.hw.l0a_bytes;
  hw["l0b_bytes"] = report.hw.l0b_bytes;
  hw["l0c_bytes"] = report.hw.l0c_bytes;
  j["hardware"] = hw;
  Json rows = Json::array();
  for (const auto& r : report.report.rows) {
    Json row;
    row["constraint"] = r.constraint;
    row["used"] = r.used;
    row["capacity"] = r.capacity;
    row["slack"] = r.slack;
    row["pass"] = r.pass;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["all_pass"] = report.report.all_pass;
  j["distinct_tight"] = report.report.distinct_tight;
  j["min_block_m"] = report.min_m;
  return j.dump(2) + "\n";
}

std::string tiling_report_csv(const TilingReportData& report,
                              const RunManifest& manifest) {
  std::ostringstream out;
  manifest_csv(out, manifest);
  out << "# config=" << report.config.name << "\n";
  out << "# hardware=" << report.hw.name << "\n";
  out << "# all_pass=" << (report.report.all_pass ? 1 : 0) << "\n";
  out << "# distinct_tight=" << report.report.distinct_tight << "\n";
  out << "# min_block_m=" << report.min_m << "\n";
  out << "constraint,used,capacity,slack,pass\n";
  for (const auto& r : report.report.rows)
    out << r.constraint << "," << r.used << "," << r.capacity << ","
        << r.slack << "," << (r.pass ? 1 : 0) << "\n";
  return out.str();
}

}  // namespace amla
