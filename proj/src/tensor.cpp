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

#include "amla/tensor.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "amla/fp_bits.hpp"

namespace amla {

Matrix round_to_bf16(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  const float* src = m.data();
  float* dst = out.data();
  const Index n = m.size();
  for (Index i = 0; i < n; ++i) dst[i] = fp32_to_bf16(src[i]);
  return out;
}

bool is_bf16_widened(const Matrix& m) {
  const float* p = m.data();
  const Index n = m.size();
  for (Index i = 0; i < n; ++i) {
    if (!is_bf16_value(p[i])) return false;
  }
  return true;
}

namespace {

// ikj loop: the j-dimension vectorizes while each output element still
// accumulates in strictly ascending k. std::fma pins one rounding per update.
Matrix matmul_core(const Matrix& a, const Matrix& b) {
  const Index m = a.rows(), k = a.cols(), n = b.cols();
  Matrix out = Matrix::Zero(m, n);
  for (Index i = 0; i < m; ++i) {
    const float* arow = a.data() + i * k;
    float* orow = out.data() + i * n;
    for (Index kk = 0; kk < k; ++kk) {
      const float aik = arow[kk];
      const float* brow = b.data() + kk * n;
      for (Index j = 0; j < n; ++j) {
        orow[j] = std::fma(aik, brow[j], orow[j]);
      }
    }
  }
  return out;
}

void check_inner(const Matrix& a, const Matrix& b, bool transpose_b) {
  const Index inner = transpose_b ? b.cols() : b.rows();
  if (a.cols() != inner) {
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(a.cols()) + " vs " +
                                std::to_string(inner) + ")");
  }
}

}  // namespace

Matrix matmul_fp32(const Matrix& a, const Matrix& b, bool transpose_b) {
  check_inner(a, b, transpose_b);
  if (!transpose_b) return matmul_core(a, b);
  Matrix bt = b.transpose();
  return matmul_core(a, bt);
}

Matrix matmul_mixed(const Matrix& a, const Matrix& b, bool transpose_b) {
  check_inner(a, b, transpose_b);
  Matrix ar = round_to_bf16(a);
  Matrix br = round_to_bf16(b);
  if (!transpose_b) return matmul_core(ar, br);
  Matrix bt = br.transpose();
  return matmul_core(ar, bt);
}

double rel_frobenius_error(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("rel_frobenius_error: shape mismatch");
  }
  const float* pa = a.data();
  const float* pb = b.data();
  const Index n = a.size();
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    num += d * d;
    den += static_cast<double>(pb[i]) * static_cast<double>(pb[i]);
  }
  return std::sqrt(num) / (std::sqrt(den) + 1e-10);
}

SoftmaxUpdate row_softmax_stats(const Matrix& s, const Vector& prev_max,
                                const Vector& prev_sum, float scale) {
  const Index rows = s.rows(), cols = s.cols();
  if (prev_max.size() != rows || prev_sum.size() != rows) {
    throw std::invalid_argument("row_softmax_stats: state size mismatch");
  }
  constexpr float kNegInf = -std::numeric_limits<float>::infinity();

  SoftmaxUpdate u;
  u.p.resize(rows, cols);
  u.new_max.resize(rows);
  u.new_sum.resize(rows);
  u.scale_up.resize(rows);
  u.finite = true;

  for (Index i = 0; i < rows; ++i) {
    const float* srow = s.data() + i * cols;
    float m = kNegInf;
    for (Index j = 0; j < cols; ++j) {
      const float v = srow[j] * scale;
      if (std::isnan(v) || v == std::numeric_limits<float>::infinity()) {
        u.finite = false;
      }
      if (v > m) m = v;
    }
    const float pm = prev_max(i);
    const float nm = pm > m ? pm : m;
    u.new_max(i) = nm;
    u.scale_up(i) = (pm == kNegInf) ? 0.0f : std::exp(pm - nm);

    float* prow = u.p.data() + i * cols;
    Eigen::Map<Eigen::Array<float, 1, Eigen::Dynamic>> pr(prow, cols);
    Eigen::Map<const Eigen::Array<float, 1, Eigen::Dynamic>> sr(srow, cols);
    pr = (sr * scale - nm).exp();

    float acc = 0.0f;  // ascending-index row sum, kept scalar on purpose
    for (Index j = 0; j < cols; ++j) acc += prow[j];
    u.new_sum(i) = std::fma(prev_sum(i), u.scale_up(i), acc);
    if (std::isnan(u.new_sum(i)) || std::isnan(u.scale_up(i))) u.finite = false;
  }
  return u;
}

}  // namespace amla
