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

// Shared helpers for the unit and acceptance suites.

#ifndef AMLA_TESTS_TEST_SUPPORT_HPP_
#define AMLA_TESTS_TEST_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "amla/fp_bits.hpp"
#include "amla/preload.hpp"
#include "amla/rng.hpp"
#include "amla/tensor.hpp"

namespace amla_test {

// Reference attention that exponentiates scores without subtracting the
// running max. Overflows to inf once scale * max(S) crosses the fp32
// exp limit (~88.72), which is exactly the failure the shifted kernels
// are designed to avoid.
inline amla::Matrix naive_unshifted_attention(const amla::Matrix& q,
                                              const amla::Matrix& k,
                                              const amla::Matrix& v,
                                              Eigen::Index block_rows) {
  const Eigen::Index g = q.rows();
  const Eigen::Index s2 = k.rows();
  const float scale = 1.0f / std::sqrt(static_cast<float>(q.cols()));
  amla::Matrix o = amla::Matrix::Zero(g, v.cols());
  amla::Vector l = amla::Vector::Zero(g);
  for (Eigen::Index b0 = 0; b0 < s2; b0 += block_rows) {
    const Eigen::Index rows = std::min(block_rows, s2 - b0);
    amla::Matrix s = amla::matmul_mixed(q, k.middleRows(b0, rows), true);
    amla::Matrix p(g, rows);
    for (Eigen::Index r = 0; r < g; ++r) {
      for (Eigen::Index c = 0; c < rows; ++c) {
        p(r, c) = std::exp(s(r, c) * scale);
      }
    }
    for (Eigen::Index r = 0; r < g; ++r) {
      for (Eigen::Index c = 0; c < rows; ++c) {
        l(r) += p(r, c);
      }
    }
    amla::Matrix pv = amla::matmul_mixed(amla::round_to_bf16(p), v.middleRows(b0, rows));
    o += pv;
  }
  for (Eigen::Index r = 0; r < g; ++r) {
    for (Eigen::Index c = 0; c < o.cols(); ++c) {
      o(r, c) /= l(r);
    }
  }
  return o;
}

inline amla::CvChain random_chain(amla::Rng& rng, int n) {
  amla::CvChain chain;
  chain.cube.resize(n);
  chain.vec.resize(n);
  for (int i = 0; i < n; ++i) {
    chain.cube[i] = 1 + static_cast<int64_t>(rng.next_u32() % 10u);
    chain.vec[i] = static_cast<int64_t>(rng.next_u32() % 11u);
  }
  return chain;
}

// Chain where one vector stage is long enough that neither of its edges
// can be satisfied inside a cycle, capping internal chains at n - 1.
inline amla::CvChain adversarial_chain(amla::Rng& rng, int n) {
  amla::CvChain chain;
  chain.cube.resize(n);
  chain.vec.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    chain.cube[i] = 1 + static_cast<int64_t>(rng.next_u32() % 10u);
  }
  const int64_t total = std::accumulate(chain.cube.begin(), chain.cube.end(), int64_t{0});
  const int64_t shortest = *std::min_element(chain.cube.begin(), chain.cube.end());
  const int k = 1 + static_cast<int>(rng.next_u32() % static_cast<uint32_t>(n - 1));
  chain.vec[k - 1] = total - shortest + 1;
  return chain;
}

inline uint32_t monotone_bits(float f) {
  const uint32_t u = static_cast<uint32_t>(amla::as_int32(f));
  return (u & 0x80000000u) ? (0x80000000u - (u & 0x7fffffffu)) : (u + 0x80000000u);
}

// Absolute distance in representable-value steps. Finite inputs only.
inline uint64_t ulp_distance(float a, float b) {
  const uint32_t ma = monotone_bits(a);
  const uint32_t mb = monotone_bits(b);
  return ma > mb ? static_cast<uint64_t>(ma - mb) : static_cast<uint64_t>(mb - ma);
}

inline uint64_t max_ulp_distance(const amla::Matrix& a, const amla::Matrix& b) {
  uint64_t worst = 0;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      worst = std::max(worst, ulp_distance(a(r, c), b(r, c)));
    }
  }
  return worst;
}

}  // namespace amla_test

#endif  // AMLA_TESTS_TEST_SUPPORT_HPP_
