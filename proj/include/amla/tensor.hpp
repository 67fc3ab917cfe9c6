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

#ifndef AMLA_TENSOR_HPP_
#define AMLA_TENSOR_HPP_

#include <Eigen/Core>

namespace amla {

using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXf;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

// One FP32 matrix type serves both precisions: BF16 data is stored widened
// (low 16 bits zero) and tagged where the nominal precision matters.
enum class Precision { kFp32, kBf16Widened };

// Elementwise round-to-nearest-even BF16, widened back to FP32.
Matrix round_to_bf16(const Matrix& m);

// True when every element round-trips through BF16 unchanged.
bool is_bf16_widened(const Matrix& m);

// C = A * B (or A * B^T when transpose_b). FP32 products accumulated in FP32
// with fused multiply-add, ascending inner index; per-element accumulation
// order is fixed so results are bit-stable across runs and platforms.
Matrix matmul_fp32(const Matrix& a, const Matrix& b, bool transpose_b = false);

// Like matmul_fp32 but both inputs are rounded to BF16 first. BF16 x BF16
// products are exact in FP32 (8-bit x 8-bit significands), so this models a
// mixed-precision multiply with FP32 accumulation. Bitwise equal to
// matmul_fp32 when both inputs are already BF16-widened.
Matrix matmul_mixed(const Matrix& a, const Matrix& b, bool transpose_b = false);

// ||a - b||_F / (||b||_F + 1e-10), accumulated in double.
double rel_frobenius_error(const Matrix& a, const Matrix& b);

// One online-softmax block update: running row max and sum with the
// numerically safe recurrence. prev_max = -inf marks "no previous block"; its
// scale_up is forced to 0 so the previous (empty) contribution vanishes.
struct SoftmaxUpdate {
  Matrix p;         // exp(s * scale - new_max), rowwise
  Vector new_max;   // max(prev_max, rowmax(s * scale))
  Vector new_sum;   // prev_sum * scale_up + rowsum(p)
  Vector scale_up;  // exp(prev_max - new_max), 0 when prev_max = -inf
  bool finite = true;  // false when s contains NaN or +inf
};

SoftmaxUpdate row_softmax_stats(const Matrix& s, const Vector& prev_max,
                                const Vector& prev_sum, float scale);

}  // namespace amla

#endif  // AMLA_TENSOR_HPP_
