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

#ifndef AMLA_PERF_MODEL_HPP_
#define AMLA_PERF_MODEL_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace amla {

// kPerHead: every KV head is stored separately (classic multi-head or
// grouped layouts, N2 distinct heads). kSharedLatent: one compressed
// Dk-wide cache row per token serves all query heads.
enum class KvCache { kPerHead, kSharedLatent };

struct WorkloadSpec {
  int64_t batch = 1;
  int64_t n1 = 1;  // query heads
  int64_t n2 = 1;  // kv heads
  int64_t s1 = 1;  // query tokens per head
  int64_t s2 = 1;  // cached tokens
  int64_t dk = 576;
  int64_t dv = 512;
  KvCache kv = KvCache::kSharedLatent;

  void validate() const;  // throws std::invalid_argument
};

// 2 * batch * N1 * S1 * S2 * (Dk + Dv) multiply-accumulate flops.
double attention_flops(const WorkloadSpec& w);

// Bytes of KV cache traffic per decode step.
double kv_mem_bytes(const WorkloadSpec& w, double elem_bytes = 2.0);

// attention_flops / kv_mem_bytes in closed form: N1*S1/N2 per-head,
// N1*S1*(Dk+Dv)/Dk shared-latent. Independent of elem_bytes = 2 scaling of
// both flops (factor 2 per MAC) and bytes.
double arithmetic_intensity(const WorkloadSpec& w);

struct HardwareProfile {
  std::string name;
  double peak_flops = 0.0;
  double hbm_bandwidth = 0.0;  // bytes/s
  int cube_units = 0;
  // On-chip capacities in bytes; 0 means unspecified.
  double l1_bytes = 0.0;
  double l0a_bytes = 0.0;
  double l0b_bytes = 0.0;
  double l0c_bytes = 0.0;
  double ub_bytes = 0.0;

  void validate() const;
  // "ascend910-derived" or "gpu-h800-class"; throws on unknown names.
  static HardwareProfile preset(const std::string& name);
  static HardwareProfile load_json(const std::string& path);
  std::string to_json() const;
};

enum class RooflineBound { kCompute, kMemory };

struct RooflineResult {
  double intensity = 0.0;         // flops per byte
  double ridge = 0.0;             // peak / bandwidth
  double attainable_flops = 0.0;  // min(peak, intensity * bandwidth)
  RooflineBound bound = RooflineBound::kCompute;
};

RooflineResult roofline_classify(const WorkloadSpec& w,
                                 const HardwareProfile& hw,
                                 double elem_bytes = 2.0);

// Achieved fraction of peak for a kernel of known work and duration.
double flops_utilization(double flops, double duration_s, double peak_flops);

// Smallest row-block size M for which a BF16 matmul against a resident
// operand stays compute bound: ceil(peak * elem_bytes / (2 * bandwidth)).
int64_t min_block_m(const HardwareProfile& hw, double elem_bytes = 2.0);

struct TilingConfig {
  std::string name;
  int64_t m = 0, n = 0, k = 0;  // full matmul extents
  int64_t single_m = 0, single_k = 0, single_n = 0;  // L1-resident panel
  int64_t base_m = 0, base_k = 0, base_n = 0;        // L0 tile
  int64_t elem_bytes = 2;

  void validate() const;
  // "c1-qk" (query-key matmul) or "c2-pv" (probability-value matmul).
  static TilingConfig preset(const std::string& name);
  static TilingConfig load_json(const std::string& path);
  std::string to_json() const;
};

struct TilingRow {
  std::string constraint;
  int64_t used = 0;
  int64_t capacity = 0;
  int64_t slack = 0;
  bool pass = false;
};

struct TilingReport {
  std::vector<TilingRow> rows;
  bool all_pass = false;
  // Zero-slack rows counted over distinct (used, capacity) pairs, so two
  // constraints that collapse to the same inequality count once.
  int distinct_tight = 0;
};

// Double-buffered L0 halves, a 7-stripe L1 residency plan (one query panel
// stripe plus two copies of a 3-stripe KV region), and the panel fits.
TilingReport validate_tiling(const TilingConfig& cfg,
                             const HardwareProfile& hw);

// Reference arithmetic-intensity comparison points (Dk 576, Dv 512).
struct IntensityPoint {
  std::string label;
  WorkloadSpec workload;
  int64_t expected_intensity = 0;  // rounded to nearest integer
};
std::vector<IntensityPoint> intensity_comparison_points();

// Measured decode kernel timings on the derived accelerator profile:
// batch 96, N1 128, shared-latent cache, Dk 576, Dv 512.
struct DecodePoint {
  int64_t s1 = 0;
  int64_t s2 = 0;
  double duration_us = 0.0;
  double expected_util_pct = 0.0;
};
std::vector<DecodePoint> ascend_decode_points();
WorkloadSpec decode_workload(int64_t s1, int64_t s2);

}  // namespace amla

#endif  // AMLA_PERF_MODEL_HPP_
