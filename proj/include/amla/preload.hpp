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

#ifndef AMLA_PRELOAD_HPP_
#define AMLA_PRELOAD_HPP_

#include <cstdint>
#include <vector>

namespace amla {

// One loop iteration is a dependency chain C1 -> V1 -> C2 -> ... -> Cn -> Vn
// alternating between a matrix unit (C stages) and a vector unit (V stages).
// Durations are integer time units.
struct CvChain {
  std::vector<int64_t> cube;
  std::vector<int64_t> vec;

  int n() const { return static_cast<int>(cube.size()); }
  int64_t total_cube() const;
  int64_t total_vec() const;
  void validate() const;  // throws std::invalid_argument
};

// a_i = V_i - C_{(i mod n)+1} for i = 1..n.
std::vector<int64_t> aux_sequence(const CvChain& chain);

// F(l) = sum of the first l entries of the auxiliary sequence, l = 1..n.
std::vector<int64_t> rotation_partial_sums(const CvChain& chain);

// Returns the rotation index k in 1..n for which every cyclic backward
// partial sum of the auxiliary sequence starting at position n-k is
// non-positive: k = n - argmin_l F(l), with 0 mapped to n and ties broken
// toward the smallest argmin.
int find_rotation(const CvChain& chain);

// Evaluates the rotation validity condition for k in 1..n directly:
// for every j in 1..n-1, sum_{i=0}^{j-1} V_{n-k-i} <= sum_{i=0}^{j-1}
// C_{n+1-k-i} with 1-based cyclic indices.
bool check_rotation(const CvChain& chain, int k);

// Same condition expressed through the auxiliary sequence: all backward
// cyclic partial sums starting at position n-k are <= 0.
bool check_rotation_partial_sums(const CvChain& chain, int k);

// A software-pipelined schedule of the chain. Each lane repeats its stage
// order once per cycle; stage X of iteration j executes in cycle j - delta_X.
// A chain edge whose endpoints share a delta is internal (producer and
// consumer meet inside one cycle); a delta drop of one makes it external.
struct CycleSchedule {
  std::vector<int> cube_order;   // 1-based stage ids, a permutation of 1..n
  std::vector<int> vector_order;
  std::vector<int> delta_cube;   // delta for C_i at index i-1
  std::vector<int> delta_vec;

  int n() const { return static_cast<int>(cube_order.size()); }
  int internal_edge_count() const;
  // Number of warm-up cycles (cycle numbers <= 0), equal to the number of
  // external edges on the chain.
  int preload_count() const;
  void validate(const CvChain& chain) const;  // throws std::invalid_argument
};

// Builds a schedule with n-1 internal edges and zero steady-state stall on
// the dominant lane. When the vector lane dominates the problem is solved on
// the time-reversed chain (roles swapped) and mapped back.
CycleSchedule max_internal_chains(const CvChain& chain);

enum class Unit { kCube, kVector };
enum class Phase { kPreload, kSteady, kDrain };

struct PipelineEvent {
  Unit unit = Unit::kCube;
  int stage = 0;          // 1-based
  int64_t iteration = 0;  // 1-based
  int64_t cycle = 0;      // <= 0 preload, 1..num_cycles steady, else drain
  Phase phase = Phase::kSteady;
  int64_t start = 0;
  int64_t end = 0;
};

struct Timeline {
  std::vector<PipelineEvent> events;
  int64_t iterations = 0;
  int64_t makespan = 0;
  int64_t preload_makespan = 0;      // last finish among preload events
  // Dominant-lane shift per cycle, 0 when < 3 steady cycles were run.
  int64_t steady_cycle_length = 0;
  int64_t steady_stall = 0;  // idle on the dominant lane, cycles 2..T
  // Every steady cycle ran every stage exactly once and the dominant lane
  // advanced by one constant shift per cycle from cycle 2 on. The other
  // lane is not required to repeat exactly: it starts work as soon as
  // dependencies allow, so it spends its slack unevenly while converging
  // onto the producer rate.
  bool steady_periodic = true;
};

// Executes num_cycles steady cycles (plus the implied preload and drain
// work) under list scheduling: a block starts at the later of its lane
// becoming free and its chain producer finishing. Throws
// std::invalid_argument if the schedule's same-cycle dependencies cannot be
// ordered. num_cycles = 0 runs only the preload iterations through to drain.
Timeline simulate_pipeline(const CvChain& chain, const CycleSchedule& schedule,
                           int64_t num_cycles);

// Exhaustive maximum over internal-edge subsets: largest s for which the 2n
// blocks fit in one window of length max(total_cube, total_vec) with both
// lanes sequential and every internal producer finishing before its consumer
// starts. Independent of the constructive scheduler; n <= 8.
int brute_force_max_internal(const CvChain& chain);

}  // namespace amla

#endif  // AMLA_PRELOAD_HPP_
