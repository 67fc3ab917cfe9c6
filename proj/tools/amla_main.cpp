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

// Exit codes: 0 success, 1 a requested check failed, 2 bad usage or
// arguments, 3 internal error, 4 output could not be written.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amla/attention.hpp"
#include "amla/perf_model.hpp"
#include "amla/preload.hpp"
#include "amla/reports.hpp"

namespace {

using namespace amla;

struct OutputOpts {
  std::string format = "both";
  std::string out;
};

void add_output_opts(CLI::App* cmd, OutputOpts& o) {
  cmd->add_option("--format", o.format, "json, csv or both")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out,
                  "output path prefix; writes <out>.json / <out>.csv instead "
                  "of stdout");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write to " + path + " failed");
}

void emit(const OutputOpts& o, const std::string& json_text,
          const std::string& csv_text) {
  const bool want_json = o.format != "csv";
  const bool want_csv = o.format != "json";
  if (o.out.empty()) {
    if (want_json) std::cout << json_text;
    if (want_csv) std::cout << csv_text;
    return;
  }
  if (want_json) write_file(o.out + ".json", json_text);
  if (want_csv) write_file(o.out + ".csv", csv_text);
}

std::vector<int64_t> parse_i64_list(const std::string& text) {
  std::vector<int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t used = 0;
    out.push_back(std::stoll(item, &used));
    if (used != item.size())
      throw std::invalid_argument("bad integer list: " + text);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

HardwareProfile resolve_hw(const std::string& name) {
  if (name.size() > 5 && name.substr(name.size() - 5) == ".json")
    return HardwareProfile::load_json(name);
  return HardwareProfile::preset(name);
}

struct AccuracyArgs {
  AttentionConfig cfg;
  int samples = 10;
  int threads = 1;
  std::string dists = "standard";
  std::string compensation = "derived";
  OutputOpts out;
};

int run_accuracy(const AccuracyArgs& a) {
  std::vector<DistributionSpec> dists;
  if (a.dists == "standard") {
    dists = standard_distributions();
  } else {
    std::stringstream ss(a.dists);
    std::string item;
    while (std::getline(ss, item, ';'))
      dists.push_back(DistributionSpec::parse(item));
  }
  const RescaleCompensation comp = a.compensation == "derived"
                                       ? RescaleCompensation::kDerived
                                       : RescaleCompensation::kAlgorithmLiteral;
  const AccuracyReport rep =
      run_accuracy_suite(dists, a.cfg, a.samples, a.threads, comp);
  const RunManifest mf = RunManifest::make(
      "accuracy",
      {{"g", std::to_string(a.cfg.g)},
       {"dk", std::to_string(a.cfg.dk)},
       {"dv", std::to_string(a.cfg.dv)},
       {"s2", std::to_string(a.cfg.s2)},
       {"kv_block", std::to_string(a.cfg.kv_block)},
       {"samples", std::to_string(a.samples)},
       {"dists", a.dists},
       {"compensation", a.compensation}},
      a.cfg.seed);
  emit(a.out, accuracy_report_json(rep, mf), accuracy_report_csv(rep, mf));
  return 0;
}

struct ScheduleArgs {
  std::string cube, vec;
  int64_t cycles = 6;
  bool oracle = false;
  OutputOpts out;
};

int run_schedule(const ScheduleArgs& a) {
  ScheduleReport rep;
  rep.chain.cube = parse_i64_list(a.cube);
  rep.chain.vec = parse_i64_list(a.vec);
  rep.schedule = max_internal_chains(rep.chain);
  rep.timeline = simulate_pipeline(rep.chain, rep.schedule, a.cycles);
  if (a.oracle) rep.oracle_max = brute_force_max_internal(rep.chain);
  const RunManifest mf = RunManifest::make(
      "schedule",
      {{"cube", a.cube},
       {"vec", a.vec},
       {"cycles", std::to_string(a.cycles)},
       {"oracle", a.oracle ? "1" : "0"}},
      0);
  emit(a.out, schedule_report_json(rep, mf), schedule_report_csv(rep, mf));
  return 0;
}

struct RooflineArgs {
  std::string preset = "custom";
  std::string hw = "ascend910-derived";
  WorkloadSpec w;
  std::string kv = "shared-latent";
  double duration_us = 0.0;
  OutputOpts out;
};

int run_roofline(const RooflineArgs& a) {
  RooflineReportData rep;
  rep.hw = resolve_hw(a.hw);
  const auto fill_row = [&](const std::string& label, const WorkloadSpec& w,
                            double duration_us, double expected_util,
                            int64_t expected_intensity) {
    RooflineRow row;
    row.label = label;
    row.workload = w;
    row.flops = attention_flops(w);
    row.kv_bytes = kv_mem_bytes(w);
    row.roofline = roofline_classify(w, rep.hw);
    row.expected_intensity = expected_intensity;
    if (duration_us > 0.0) {
      row.duration_us = duration_us;
      row.utilization_pct =
          100.0 *
          flops_utilization(row.flops, duration_us * 1e-6, rep.hw.peak_flops);
      row.expected_util_pct = expected_util;
    }
    return row;
  };
  if (a.preset == "intensity-points") {
    for (const auto& p : intensity_comparison_points())
      rep.rows.push_back(
          fill_row(p.label, p.workload, 0.0, 0.0, p.expected_intensity));
  } else if (a.preset == "decode-table") {
    for (const auto& p : ascend_decode_points()) {
      std::ostringstream label;
      label << "decode-s1_" << p.s1 << "-s2_" << p.s2;
      rep.rows.push_back(fill_row(label.str(), decode_workload(p.s1, p.s2),
                                  p.duration_us, p.expected_util_pct, 0));
    }
  } else {
    WorkloadSpec w = a.w;
    w.kv = a.kv == "per-head" ? KvCache::kPerHead : KvCache::kSharedLatent;
    rep.rows.push_back(fill_row("custom", w, a.duration_us, 0.0, 0));
  }
  const RunManifest mf = RunManifest::make(
      "roofline", {{"preset", a.preset}, {"hw", a.hw}}, 0);
  emit(a.out, roofline_report_json(rep, mf), roofline_report_csv(rep, mf));
  return 0;
}

struct TilingArgs {
  std::string config = "c1-qk";
  std::string hw = "ascend910-derived";
  int64_t base_m = 0, base_k = 0, base_n = 0;
  int64_t single_m = 0, single_k = 0, single_n = 0;
  OutputOpts out;
};

int run_tiling(const TilingArgs& a) {
  TilingReportData rep;
  if (a.config.size() > 5 &&
      a.config.substr(a.config.size() - 5) == ".json")
    rep.config = TilingConfig::load_json(a.config);
  else
    rep.config = TilingConfig::preset(a.config);
  if (a.base_m > 0) rep.config.base_m = a.base_m;
  if (a.base_k > 0) rep.config.base_k = a.base_k;
  if (a.base_n > 0) rep.config.base_n = a.base_n;
  if (a.single_m > 0) rep.config.single_m = a.single_m;
  if (a.single_k > 0) rep.config.single_k = a.single_k;
  if (a.single_n > 0) rep.config.single_n = a.single_n;
  rep.hw = resolve_hw(a.hw);
  rep.report = validate_tiling(rep.config, rep.hw);
  rep.min_m = min_block_m(rep.hw);
  const RunManifest mf = RunManifest::make(
      "tiling", {{"config", a.config}, {"hw", a.hw}}, 0);
  emit(a.out, tiling_report_json(rep, mf), tiling_report_csv(rep, mf));
  return rep.report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"models and checks for int32-rescaled decode attention"};
  app.require_subcommand(1);

  AccuracyArgs acc;
  acc.cfg.s2 = 1024;
  CLI::App* c_acc =
      app.add_subcommand("accuracy", "relative-error suite for the kernels");
  c_acc->add_option("--g", acc.cfg.g, "query rows")->capture_default_str();
  c_acc->add_option("--dk", acc.cfg.dk, "key dimension")->capture_default_str();
  c_acc->add_option("--dv", acc.cfg.dv, "value dimension")
      ->capture_default_str();
  c_acc->add_option("--s2", acc.cfg.s2, "context length")
      ->capture_default_str();
  c_acc->add_option("--kv-block", acc.cfg.kv_block, "rows per kv block")
      ->capture_default_str();
  c_acc->add_option("--samples", acc.samples, "samples per distribution")
      ->capture_default_str();
  c_acc->add_option("--seed", acc.cfg.seed, "base seed")
      ->capture_default_str();
  c_acc->add_option("--threads", acc.threads, "worker threads")
      ->capture_default_str();
  c_acc->add_option("--dists", acc.dists,
                    "'standard' or ;-separated specs like gaussian:25 or "
                    "uniform:-5:5")
      ->capture_default_str();
  c_acc->add_option("--compensation", acc.compensation,
                    "rescale compensation orientation")
      ->check(CLI::IsMember({"derived", "literal"}))
      ->capture_default_str();
  add_output_opts(c_acc, acc.out);

  ScheduleArgs sch;
  CLI::App* c_sch = app.add_subcommand(
      "schedule", "software-pipeline construction and simulation");
  c_sch->add_option("--cube", sch.cube, "matrix-stage durations, e.g. 1,1,4")
      ->required();
  c_sch->add_option("--vec", sch.vec, "vector-stage durations, e.g. 2,2,2")
      ->required();
  c_sch->add_option("--cycles", sch.cycles, "steady cycles to simulate")
      ->capture_default_str();
  c_sch->add_flag("--oracle", sch.oracle,
                  "also run the exhaustive internal-edge maximum (n <= 8)");
  add_output_opts(c_sch, sch.out);

  RooflineArgs roof;
  CLI::App* c_roof = app.add_subcommand(
      "roofline", "arithmetic intensity and attainable throughput");
  c_roof->add_option("--preset", roof.preset,
                     "custom, intensity-points or decode-table (timed "
                     "decode points)")
      ->check(CLI::IsMember({"custom", "intensity-points", "decode-table"}))
      ->capture_default_str();
  c_roof->add_option("--hw", roof.hw, "hardware preset name or JSON file")
      ->capture_default_str();
  c_roof->add_option("--batch", roof.w.batch)->capture_default_str();
  c_roof->add_option("--n1", roof.w.n1)->capture_default_str();
  c_roof->add_option("--n2", roof.w.n2)->capture_default_str();
  c_roof->add_option("--s1", roof.w.s1)->capture_default_str();
  c_roof->add_option("--s2", roof.w.s2)->capture_default_str();
  c_roof->add_option("--dk", roof.w.dk)->capture_default_str();
  c_roof->add_option("--dv", roof.w.dv)->capture_default_str();
  c_roof->add_option("--kv", roof.kv, "per-head or shared-latent")
      ->check(CLI::IsMember({"per-head", "shared-latent"}))
      ->capture_default_str();
  c_roof->add_option("--duration-us", roof.duration_us,
                     "measured duration, enables utilization");
  add_output_opts(c_roof, roof.out);

  TilingArgs til;
  CLI::App* c_til =
      app.add_subcommand("tiling", "on-chip capacity checks for one matmul");
  c_til->add_option("--config", til.config,
                    "c1-qk, c2-pv or a JSON file")
      ->capture_default_str();
  c_til->add_option("--hw", til.hw, "hardware preset name or JSON file")
      ->capture_default_str();
  c_til->add_option("--base-m", til.base_m, "override tile rows");
  c_til->add_option("--base-k", til.base_k, "override tile depth");
  c_til->add_option("--base-n", til.base_n, "override tile columns");
  c_til->add_option("--single-m", til.single_m, "override panel rows");
  c_til->add_option("--single-k", til.single_k, "override panel depth");
  c_til->add_option("--single-n", til.single_n, "override panel columns");
  add_output_opts(c_til, til.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_acc)) return run_accuracy(acc);
    if (app.got_subcommand(c_sch)) return run_schedule(sch);
    if (app.got_subcommand(c_roof)) return run_roofline(roof);
    return run_tiling(til);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
