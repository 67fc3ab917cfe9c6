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

#include "amla/perf_model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace amla {
namespace {

constexpr int64_t kL1StripeBytes = 73728;

nlohmann::ordered_json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::ordered_json j;
  in >> j;
  return j;
}

}  // namespace

void WorkloadSpec::validate() const {
  if (batch <= 0 || n1 <= 0 || n2 <= 0 || s1 <= 0 || s2 <= 0 || dk <= 0 ||
      dv <= 0)
    throw std::invalid_argument("workload dimensions must be positive");
  if (kv == KvCache::kPerHead && n1 % n2 != 0)
    throw std::invalid_argument("query heads must divide evenly over kv heads");
}

double attention_flops(const WorkloadSpec& w) {
  w.validate();
  return 2.0 * static_cast<double>(w.batch) * static_cast<double>(w.n1) *
         static_cast<double>(w.s1) * static_cast<double>(w.s2) *
         static_cast<double>(w.dk + w.dv);
}

double kv_mem_bytes(const WorkloadSpec& w, double elem_bytes) {
  w.validate();
  if (elem_bytes <= 0.0)
    throw std::invalid_argument("elem_bytes must be positive");
  const double per_token =
      w.kv == KvCache::kPerHead
          ? static_cast<double>(w.n2) * static_cast<double>(w.dk + w.dv)
          : static_cast<double>(w.dk);
  return elem_bytes * static_cast<double>(w.batch) *
         static_cast<double>(w.s2) * per_token;
}

double arithmetic_intensity(const WorkloadSpec& w) {
  w.validate();
  const double ns = static_cast<double>(w.n1) * static_cast<double>(w.s1);
  if (w.kv == KvCache::kPerHead) return ns / static_cast<double>(w.n2);
  return ns * static_cast<double>(w.dk + w.dv) / static_cast<double>(w.dk);
}

void HardwareProfile::validate() const {
  if (peak_flops <= 0.0 || hbm_bandwidth <= 0.0)
    throw std::invalid_argument("profile needs positive peak and bandwidth");
  if (l1_bytes < 0 || l0a_bytes < 0 || l0b_bytes < 0 || l0c_bytes < 0 ||
      ub_bytes < 0 || cube_units < 0)
    throw std::invalid_argument("capacities must be non-negative");
}

HardwareProfile HardwareProfile::preset(const std::string& name) {
  HardwareProfile hw;
  hw.name = name;
  if (name == "ascend910-derived") {
    // Peak derived from the best observed decode throughput (614 TFLOPS at
    // 86.8% utilization).
    hw.peak_flops = 614e12 / 0.868;
    hw.hbm_bandwidth = 3.2e12;
    hw.cube_units = 48;
    hw.l1_bytes = 524288;
    hw.l0a_bytes = 65536;
    hw.l0b_bytes = 65536;
    hw.l0c_bytes = 131072;
    hw.ub_bytes = 196608;
  } else if (name == "gpu-h800-class") {
    hw.peak_flops = 989e12;
    hw.hbm_bandwidth = 3.35e12;
  } else {
    throw std::invalid_argument("unknown hardware preset: " + name);
  }
  return hw;
}

HardwareProfile HardwareProfile::load_json(const std::string& path) {
  const auto j = read_json_file(path);
  HardwareProfile hw;
  hw.name = j.value("name", path);
  hw.peak_flops = j.at("peak_flops").get<double>();
  hw.hbm_bandwidth = j.at("hbm_bandwidth").get<double>();
  hw.cube_units = j.value("cube_units", 0);
  hw.l1_bytes = j.value("l1_bytes", 0.0);
  hw.l0a_bytes = j.value("l0a_bytes", 0.0);
  hw.l0b_bytes = j.value("l0b_bytes", 0.0);
  hw.l0c_bytes = j.value("l0c_bytes", 0.0);
  hw.ub_bytes = j.value("ub_bytes", 0.0);
  hw.validate();
  return hw;
}

std::string HardwareProfile::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["peak_flops"] = peak_flops;
  j["hbm_bandwidth"] = hbm_bandwidth;
  j["cube_units"] = cube_units;
  j["l1_bytes"] = l1_bytes;
  j["l0a_bytes"] = l0a_bytes;
  j["l0b_bytes"] = l0b_bytes;
  j["l0c_bytes"] = l0c_bytes;
  j["ub_bytes"] = ub_bytes;
  return j.dump(2);
}

RooflineResult roofline_classify(const WorkloadSpec& w,
                                 const HardwareProfile& hw,
                                 double elem_bytes) {
  hw.validate();
  RooflineResult r;
  r.intensity = attention_flops(w) / kv_mem_bytes(w, elem_bytes);
  r.ridge = hw.peak_flops / hw.hbm_bandwidth;
  const double mem_bound_flops = r.intensity * hw.hbm_bandwidth;
  r.attainable_flops = std::min(hw.peak_flops, mem_bound_flops);
  r.bound = mem_bound_flops >= hw.peak_flops ? RooflineBound::kCompute
                                             : RooflineBound::kMemory;
  return r;
}

double flops_utilization(double flops, double duration_s, double peak_flops) {
  if (flops < 0.0 || duration_s <= 0.0 || peak_flops <= 0.0)
    throw std::invalid_argument("utilization needs positive duration and peak");
  return flops / duration_s / peak_flops;
}

int64_t min_block_m(const HardwareProfile& hw, double elem_bytes) {
  hw.validate();
  if (elem_bytes <= 0.0)
    throw std::invalid_argument("elem_bytes must be positive");
  return static_cast<int64_t>(
      std::ceil(hw.peak_flops * elem_bytes / (2.0 * hw.hbm_bandwidth)));
}

void TilingConfig::validate() const {
  if (m <= 0 || n <= 0 || k <= 0 || single_m <= 0 || single_k <= 0 ||
      single_n <= 0 || base_m <= 0 || base_k <= 0 || base_n <= 0 ||
      elem_bytes <= 0)
    throw std::invalid_argument("tiling extents must be positive");
  if (single_m > m || single_k > k || single_n > n)
    throw std::invalid_argument("panel exceeds matmul extents");
  if (base_m > single_m || base_k > single_k || base_n > single_n)
    throw std::invalid_argument("tile exceeds panel extents");
}

TilingConfig TilingConfig::preset(const std::string& name) {
  TilingConfig c;
  c.name = name;
  if (name == "c1-qk") {
    c.m = 128;
    c.k = 576;
    c.n = 512;
    c.single_m = 128;
    c.single_k = 288;
    c.single_n = 256;
    c.base_m = 128;
    c.base_k = 96;
    c.base_n = 128;
  } else if (name == "c2-pv") {
    c.m = 128;
    c.k = 512;
    c.n = 512;
    c.single_m = 128;
    c.single_k = 256;
    c.single_n = 256;
    c.base_m = 128;
    c.base_k = 128;
    c.base_n = 128;
  } else {
    throw std::invalid_argument("unknown tiling preset: " + name);
  }
  return c;
}

TilingConfig TilingConfig::load_json(const std::string& path) {
  const auto j = read_json_file(path);
  TilingConfig c;
  c.name = j.value("name", path);
  c.m = j.at("m").get<int64_t>();
  c.n = j.at("n").get<int64_t>();
  c.k = j.at("k").get<int64_t>();
  c.single_m = j.at("single_m").get<int64_t>();
  c.single_k = j.at("single_k").get<int64_t>();
  c.single_n = j.at("single_n").get<int64_t>();
  c.base_m = j.at("base_m").get<int64_t>();
  c.base_k = j.at("base_k").get<int64_t>();
  c.base_n = j.at("base_n").get<int64_t>();
  c.elem_bytes = j.value("elem_bytes", 2);
  c.validate();
  return c;
}

std::string TilingConfig::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["m"] = m;
  j["n"] = n;
  j["k"] = k;
  j["single_m"] = single_m;
  j["single_k"] = single_k;
  j["single_n"] = single_n;
  j["base_m"] = base_m;
  j["base_k"] = base_k;
  j["base_n"] = base_n;
  j["elem_bytes"] = elem_bytes;
  return j.dump(2);
}

TilingReport validate_tiling(const TilingConfig& cfg,
                             const HardwareProfile& hw) {
  cfg.validate();
  hw.validate();
  if (hw.l1_bytes <= 0 || hw.l0a_bytes <= 0 || hw.l0b_bytes <= 0 ||
      hw.l0c_bytes <= 0)
    throw std::invalid_argument("profile lacks on-chip capacities");

  TilingReport rep;
  const auto add = [&](const std::string& name, int64_t used,
                       int64_t capacity) {
    TilingRow row;
    row.constraint = name;
    row.used = used;
    row.capacity = capacity;
    row.slack = capacity - used;
    row.pass = used <= capacity;
    rep.rows.push_back(row);
  };
  add("l0a_half", cfg.base_m * cfg.base_k * cfg.elem_bytes,
      static_cast<int64_t>(hw.l0a_bytes) / 2);
  add("l0b_half", cfg.base_n * cfg.base_k * cfg.elem_bytes,
      static_cast<int64_t>(hw.l0b_bytes) / 2);
  add("l0c_half", cfg.base_m * cfg.base_n * 4,
      static_cast<int64_t>(hw.l0c_bytes) / 2);
  add("l1_plan", 7 * kL1StripeBytes, static_cast<int64_t>(hw.l1_bytes));
  add("lhs_stripe", cfg.single_m * cfg.single_k * cfg.elem_bytes,
      kL1StripeBytes);
  add("rhs_region", cfg.single_n * cfg.single_k * cfg.elem_bytes,
      3 * kL1StripeBytes);

  rep.all_pass = true;
  std::vector<std::pair<int64_t, int64_t>> tight;
  for (const TilingRow& r : rep.rows) {
    rep.all_pass = rep.all_pass && r.pass;
    if (r.slack == 0) {
      const auto key = std::make_pair(r.used, r.capacity);
      bool dup = false;
      for (const auto& t : tight) dup = dup || t == key;
      if (!dup) tight.push_back(key);
    }
  }
  rep.distinct_tight = static_cast<int>(tight.size());
  return rep;
}

std::vector<IntensityPoint> intensity_comparison_points() {
  const auto make = [](const std::string& label, int64_t n1, int64_t n2,
                       int64_t s1, KvCache kv, int64_t expected) {
    IntensityPoint p;
    p.label = label;
    p.workload.batch = 1;
    p.workload.n1 = n1;
    p.workload.n2 = n2;
    p.workload.s1 = s1;
    p.workload.s2 = 4096;
    p.workload.dk = 576;
    p.workload.dv = 512;
    p.workload.kv = kv;
    p.expected_intensity = expected;
    return p;
  };
  return {
      make("mha-64h", 64, 64, 1, KvCache::kPerHead, 1),
      make("gqa-64h-8kv", 64, 8, 1, KvCache::kPerHead, 8),
      make("latent-64h", 64, 1, 1, KvCache::kSharedLatent, 121),
      make("latent-128h", 128, 1, 1, KvCache::kSharedLatent, 242),
      make("latent-128h-2t", 128, 1, 2, KvCache::kSharedLatent, 484),
  };
}

WorkloadSpec decode_workload(int64_t s1, int64_t s2) {
  WorkloadSpec w;
  w.batch = 96;
  w.n1 = 128;
  w.n2 = 1;
  w.s1 = s1;
  w.s2 = s2;
  w.dk = 576;
  w.dv = 512;
  w.kv = KvCache::kSharedLatent;
  return w;
}

std::vector<DecodePoint> ascend_decode_points() {
  return {
      {1, 1024, 95.0, 40.9},   {1, 2048, 140.0, 55.1},
      {1, 3072, 186.0, 62.4},  {1, 4096, 241.0, 64.1},
      {1, 6144, 331.0, 70.2},  {1, 16384, 830.0, 74.5},
      {2, 1024, 135.0, 57.3},  {2, 2048, 219.0, 70.7},
      {2, 3072, 306.0, 75.8},  {2, 4096, 388.0, 79.7},
      {2, 6144, 565.0, 82.2},  {2, 16384, 1427.0, 86.8},
  };
}

}  // namespace amla
