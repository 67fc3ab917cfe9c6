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

#ifndef AMLA_ATTENTION_HPP_
#define AMLA_ATTENTION_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "amla/tensor.hpp"

namespace amla {

// Decode-shape attention: G query rows attend over S2 cached rows, processed
// in kv_block-row blocks (last block may be short).
struct AttentionConfig {
  Index g = 128;
  Index dk = 576;
  Index dv = 512;
  Index s2 = 8192;
  Index kv_block = 512;
  uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
  Index num_blocks() const { return (s2 + kv_block - 1) / kv_block; }
};

// Reference: softmax(Q K^T / sqrt(Dk)) V entirely in FP32, one global safe
// softmax, no blocking.
Matrix golden_attention(const Matrix& q, const Matrix& k, const Matrix& v);

// Blocked online-softmax attention with mixed-precision matmuls (inputs and
// the probability block are rounded to BF16; accumulation stays FP32) and
// FP32 rescaling of the running output. max_blocks = 0 processes everything;
// a positive value stops after that many blocks and normalizes, which must be
// bit-identical to running on the truncated input.
Matrix base_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                      const AttentionConfig& cfg, Index max_blocks = 0);

// Orientation of the error-compensation term fed into the INT32 rescale.
// kAlgorithmLiteral uses eps = 1.5*(c_i/c_{i-1} - 1) with c = S32/S16;
// kDerived uses the reciprocal ratio, which is what the compensated
// recurrence derivation requires. Both are kept because the two disagree in
// sign at first order; kDerived is the measured-accuracy default.
enum class RescaleCompensation { kAlgorithmLiteral, kDerived };

struct AmlaOptions {
  RescaleCompensation compensation = RescaleCompensation::kDerived;
  Index max_blocks = 0;
  // Simulated-atomic controls: split each block's FP32 output contribution
  // into this many inner-dim chunks and apply them in a seeded permuted
  // order. 1 chunk = plain sequential accumulation.
  int atomic_chunks = 1;
  uint64_t atomic_order_seed = 0;
};

struct AmlaDiagnostics {
  // Per-block, per-row traces.
  std::vector<IntVector> n;     // round(-m_i / ln 2)
  std::vector<Vector> c;        // S32 / S16
  std::vector<Vector> eps;      // applied compensation term
  int64_t clamp_activations = 0;   // n_i - n_{i-1} < -30 occurrences
  int64_t zero_guard_hits = 0;     // +/-0 elements skipped by the INT32 add
  int64_t exponent_wraps = 0;  // rescale left normal range, element saturated
  float max_exp_argument = 0.0f;   // largest argument fed to any exp
  double min_r = 0.0, max_r = 0.0; // implied r_i = exp(-n_i ln2 - m_i) range
  bool finite = true;
  Index blocks = 0;
};

// INT32-rescaled attention: the running FP32 output block in simulated global
// memory is rescaled between blocks by one integer addition per element
// (exponent offset plus compensation), replacing the FP32 rescale multiply.
std::pair<Matrix, AmlaDiagnostics> amla_attention(const Matrix& q,
                                                  const Matrix& k,
                                                  const Matrix& v,
                                                  const AttentionConfig& cfg,
                                                  const AmlaOptions& opts = {});

// Input distribution for the accuracy suite; values are drawn in FP32 and
// rounded to BF16 before use so every method consumes identical inputs.
struct DistributionSpec {
  enum class Kind { kGaussian, kUniform };
  Kind kind = Kind::kGaussian;
  double param_a = 1.0;  // sigma^2 for gaussian, lower bound for uniform
  double param_b = 0.0;  // upper bound for uniform

  // "gaussian:<sigma^2>" or "uniform:<lo>:<hi>"; throws on malformed input.
  static DistributionSpec parse(const std::string& text);
  std::string label() const;
};

// The twelve reference evaluation distributions:
// N(0, sigma^2) for sigma^2 in {1,4,9,16,25,100} and U(-a, a) for
// a in {1,3,5,10,20,60}.
std::vector<DistributionSpec> standard_distributions();

struct MethodStats {
  std::vector<double> samples;
  double mean = 0.0, min = 0.0, max = 0.0;
};

struct DistributionResult {
  DistributionSpec dist;
  MethodStats base;
  MethodStats amla;
};

struct AccuracyReport {
  AttentionConfig config;
  int n_samples = 0;
  RescaleCompensation compensation = RescaleCompensation::kDerived;
  std::vector<DistributionResult> results;
};

// Draws n_samples (Q, K, V) triples per distribution, rounds them to BF16,
// and records each method's relative Frobenius error against the golden
// reference. The blocked pipelines emit BF16 output tensors, so their
// results are rounded to BF16 before the error is taken; the golden
// reference stays FP32. Samples own their state, so they run on n_threads
// in parallel with results identical to sequential execution.
AccuracyReport run_accuracy_suite(const std::vector<DistributionSpec>& dists,
                                  const AttentionConfig& cfg, int n_samples,
                                  int n_threads = 1,
                                  RescaleCompensation comp =
                                      RescaleCompensation::kDerived);

// Draws one BF16-widened matrix from dist (helper shared with tests).
Matrix draw_bf16_matrix(Index rows, Index cols, const DistributionSpec& dist,
                        uint32_t seed);

}  // namespace amla

#endif  // AMLA_ATTENTION_HPP_
