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

#include "amla/attention.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "amla/fp_bits.hpp"
#include "amla/rng.hpp"

namespace amla {
namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr float kNegInf = -std::numeric_limits<float>::infinity();

void check_shapes(const Matrix& q, const Matrix& k, const Matrix& v) {
  if (q.cols() != k.cols())
    throw std::invalid_argument("q and k must share the head dimension");
  if (k.rows() != v.rows())
    throw std::invalid_argument("k and v must share the context length");
  if (k.rows() == 0) throw std::invalid_argument("empty context");
}

Index clamp_blocks(const AttentionConfig& cfg, Index max_blocks) {
  const Index total = cfg.num_blocks();
  return (max_blocks > 0 && max_blocks < total) ? max_blocks : total;
}

}  // namespace

void AttentionConfig::validate() const {
  if (g <= 0 || dk <= 0 || dv <= 0 || s2 <= 0)
    throw std::invalid_argument("attention dimensions must be positive");
  if (kv_block <= 0) throw std::invalid_argument("kv_block must be positive");
}

Matrix golden_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  check_shapes(q, k, v);
  const float scale = 1.0f / std::sqrt(static_cast<float>(q.cols()));
  Matrix s = matmul_fp32(q, k, /*transpose_b=*/true);
  Matrix p(s.rows(), s.cols());
  for (Index r = 0; r < s.rows(); ++r) {
    float m = kNegInf;
    for (Index j = 0; j < s.cols(); ++j) m = std::max(m, s(r, j) * scale);
    float acc = 0.0f;
    for (Index j = 0; j < s.cols(); ++j) {
      const float e = std::exp(s(r, j) * scale - m);
      p(r, j) = e;
      acc += e;
    }
    for (Index j = 0; j < s.cols(); ++j) p(r, j) /= acc;
  }
  return matmul_fp32(p, v);
}

Matrix base_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                      const AttentionConfig& cfg, Index max_blocks) {
  check_shapes(q, k, v);
  cfg.validate();
  if (k.rows() != cfg.s2)
    throw std::invalid_argument("context length does not match config");
  const float scale = 1.0f / std::sqrt(static_cast<float>(q.cols()));
  const Index blocks = clamp_blocks(cfg, max_blocks);

  Matrix o = Matrix::Zero(q.rows(), v.cols());
  Vector m = Vector::Constant(q.rows(), kNegInf);
  Vector l = Vector::Zero(q.rows());

  for (Index b = 0; b < blocks; ++b) {
    const Index row0 = b * cfg.kv_block;
    const Index rows = std::min(cfg.kv_block, cfg.s2 - row0);
    const Matrix s = matmul_mixed(q, k.middleRows(row0, rows), true);
    const SoftmaxUpdate u = row_softmax_stats(s, m, l, scale);
    const Matrix pv = matmul_mixed(round_to_bf16(u.p), v.middleRows(row0, rows));
    for (Index r = 0; r < o.rows(); ++r)
      for (Index j = 0; j < o.cols(); ++j)
        o(r, j) = std::fma(o(r, j), u.scale_up(r), pv(r, j));
    m = u.new_max;
    l = u.new_sum;
  }
  for (Index r = 0; r < o.rows(); ++r)
    for (Index j = 0; j < o.cols(); ++j) o(r, j) /= l(r);
  return o;
}

std::pair<Matrix, AmlaDiagnostics> amla_attention(const Matrix& q,
                                                  const Matrix& k,
                                                  const Matrix& v,
                                                  const AttentionConfig& cfg,
                                                  const AmlaOptions& opts) {
  check_shapes(q, k, v);
  cfg.validate();
  if (k.rows() != cfg.s2)
    throw std::invalid_argument("context length does not match config");
  if (opts.atomic_chunks < 1)
    throw std::invalid_argument("atomic_chunks must be >= 1");
  const float scale = 1.0f / std::sqrt(static_cast<float>(q.cols()));
  const Index blocks = clamp_blocks(cfg, opts.max_blocks);

  const Index g = q.rows();
  Matrix o = Matrix::Zero(g, v.cols());
  Vector m = Vector::Constant(g, kNegInf);
  Vector l = Vector::Zero(g);
  IntVector n_prev = IntVector::Zero(g);
  Vector c_prev = Vector::Ones(g);
  Vector s16 = Vector::Ones(g);

  AmlaDiagnostics diag;
  diag.max_exp_argument = kNegInf;
  diag.min_r = std::numeric_limits<double>::infinity();
  diag.max_r = -std::numeric_limits<double>::infinity();

  for (Index b = 0; b < blocks; ++b) {
    const Index row0 = b * cfg.kv_block;
    const Index rows = std::min(cfg.kv_block, cfg.s2 - row0);
    const Matrix s = matmul_mixed(q, k.middleRows(row0, rows), true);
    const SoftmaxUpdate u = row_softmax_stats(s, m, l, scale);
    if (!u.finite) diag.finite = false;

    IntVector n(g);
    Vector c(g), eps = Vector::Zero(g), s32(g);
    for (Index r = 0; r < g; ++r) {
      float smax = kNegInf;
      for (Index j = 0; j < rows; ++j) smax = std::max(smax, s(r, j) * scale);
      diag.max_exp_argument =
          std::max(diag.max_exp_argument, smax - u.new_max(r));
      if (std::isfinite(m(r)))
        diag.max_exp_argument =
            std::max(diag.max_exp_argument, m(r) - u.new_max(r));

      n(r) = static_cast<int32_t>(
          std::lround(-static_cast<double>(u.new_max(r)) / kLn2));
      const float arg =
          std::fma(static_cast<float>(kLn2), static_cast<float>(n(r)),
                   u.new_max(r));
      diag.max_exp_argument = std::max(diag.max_exp_argument, arg);
      s32(r) = std::exp(arg);
      const double r_implied = 1.0 / static_cast<double>(s32(r));
      diag.min_r = std::min(diag.min_r, r_implied);
      diag.max_r = std::max(diag.max_r, r_implied);
      s16(r) = fp32_to_bf16(s32(r));
      c(r) = s32(r) / s16(r);
    }

    if (b > 0) {
      for (Index r = 0; r < g; ++r) {
        const float ratio =
            opts.compensation == RescaleCompensation::kAlgorithmLiteral
                ? c(r) / c_prev(r)
                : c_prev(r) / c(r);
        eps(r) = 1.5f * (ratio - 1.0f);
        int64_t dn = static_cast<int64_t>(n(r)) - n_prev(r);
        if (dn < -30) {
          dn = -30;
          ++diag.clamp_activations;
        }
        // Offset arithmetic in double so the 1e-6 nudge is not absorbed by
        // the integer part when |dn| is large.
        const double t =
            static_cast<double>(dn) + static_cast<double>(eps(r)) + 1e-6;
        const int32_t offset = static_cast<int32_t>(t * 8388608.0);
        for (Index j = 0; j < o.cols(); ++j) {
          const int32_t bits = as_int32(o(r, j));
          const int32_t sign =
              static_cast<int32_t>(static_cast<uint32_t>(bits) & kFp32SignMask);
          const int64_t mag = bits & static_cast<int32_t>(~kFp32SignMask);
          if (mag == 0) {
            ++diag.zero_guard_hits;
            continue;
          }
          // The integer add models the multiply only while the exponent
          // stays in normal range. Outside it the true product under- or
          // overflows, so the element goes to signed zero or infinity
          // instead of wrapping into an unrelated bit pattern.
          const int64_t shifted = mag + offset;
          if (shifted < kFp32ExpUnit) {
            ++diag.exponent_wraps;
            o(r, j) = as_fp32(sign);
          } else if (shifted >= static_cast<int64_t>(kFp32ExpMask)) {
            ++diag.exponent_wraps;
            o(r, j) = as_fp32(sign | static_cast<int32_t>(kFp32ExpMask));
          } else {
            o(r, j) = as_fp32(sign | static_cast<int32_t>(shifted));
          }
        }
      }
    }

    Matrix p = u.p;
    for (Index r = 0; r < g; ++r)
      for (Index j = 0; j < rows; ++j) p(r, j) *= s16(r);
    p = round_to_bf16(p);

    const Matrix vb = v.middleRows(row0, rows);
    if (opts.atomic_chunks == 1 || rows == 1) {
      o += matmul_mixed(p, vb);
    } else {
      const int chunks =
          static_cast<int>(std::min<Index>(opts.atomic_chunks, rows));
      std::vector<Matrix> parts;
      parts.reserve(chunks);
      for (int t = 0; t < chunks; ++t) {
        const Index a = rows * t / chunks;
        const Index e = rows * (t + 1) / chunks;
        parts.push_back(
            matmul_mixed(p.middleCols(a, e - a), vb.middleRows(a, e - a)));
      }
      std::vector<int> order(chunks);
      for (int t = 0; t < chunks; ++t) order[t] = t;
      Rng perm(derive_seed(opts.atomic_order_seed, 0x41544f4dull,
                           static_cast<uint64_t>(b)));
      for (int t = chunks - 1; t > 0; --t)
        std::swap(order[t], order[perm.next_u32() % (t + 1)]);
      for (int t = 0; t < chunks; ++t) o += parts[order[t]];
    }

    diag.n.push_back(n);
    diag.c.push_back(c);
    diag.eps.push_back(eps);
    m = u.new_max;
    l = u.new_sum;
    n_prev = n;
    c_prev = c;
  }

  for (Index r = 0; r < g; ++r) {
    const float denom = l(r) * s16(r);
    for (Index j = 0; j < o.cols(); ++j) o(r, j) /= denom;
  }
  for (Index r = 0; r < g && diag.finite; ++r)
    for (Index j = 0; j < o.cols(); ++j)
      if (!std::isfinite(o(r, j))) {
        diag.finite = false;
        break;
      }
  diag.blocks = blocks;
  return {std::move(o), diag};
}

}  // namespace amla
