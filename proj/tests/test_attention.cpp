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

#include <cmath>
#include <limits>
#include <stdexcept>

#include "amla/attention.hpp"
#include "amla/fp_bits.hpp"
#include "amla/rng.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace {

using amla::AttentionConfig;
using amla::Matrix;

const amla::DistributionSpec kGauss1{amla::DistributionSpec::Kind::kGaussian,
                                     1.0, 0.0};
const amla::DistributionSpec kGauss25{amla::DistributionSpec::Kind::kGaussian,
                                      25.0, 0.0};
const amla::DistributionSpec kUnitPos{amla::DistributionSpec::Kind::kUniform,
                                      0.25, 1.75};

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      if (amla::as_int32(a(r, c)) != amla::as_int32(b(r, c))) return false;
  return true;
}

// One BF16 step at the magnitude of x.
double bf16_ulp(double x) {
  if (x == 0.0) return 1e-30;
  return std::ldexp(1.0, std::ilogb(std::fabs(x)) - 7);
}

}  // namespace

TEST_SUITE("attention") {

TEST_CASE("all methods agree on a 1x1 context") {
  Matrix q(1, 1), k(1, 1), v(1, 1);
  q << 1.0f;
  k << 1.0f;
  v << 2.0f;
  AttentionConfig cfg;
  cfg.g = 1;
  cfg.dk = 1;
  cfg.dv = 1;
  cfg.s2 = 1;
  cfg.kv_block = 1;
  CHECK(amla::golden_attention(q, k, v)(0, 0) == 2.0f);
  CHECK(amla::base_attention(q, k, v, cfg)(0, 0) == 2.0f);
  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
  CHECK(o(0, 0) == 2.0f);
  CHECK(diag.finite);
  CHECK(diag.blocks == 1);
}

TEST_CASE("single context row broadcasts v to every query row") {
  const Matrix q = amla::draw_bf16_matrix(3, 4, kGauss1, 21);
  const Matrix k = amla::draw_bf16_matrix(1, 4, kGauss1, 22);
  const Matrix v = amla::draw_bf16_matrix(1, 5, kGauss1, 23);
  const Matrix o = amla::golden_attention(q, k, v);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < 5; ++c) CHECK(o(r, c) == v(0, c));
}

TEST_CASE("golden matches a scalar hand computation") {
  Matrix q(1, 1), k(2, 1), v(2, 1);
  q << 1.0f;
  k << 0.0f, static_cast<float>(std::log(4.0));
  v << 0.0f, 1.0f;
  const Matrix o = amla::golden_attention(q, k, v);
  CHECK(o(0, 0) == doctest::Approx(0.8).epsilon(1e-6));
}

TEST_CASE("identical context rows average v uniformly") {
  Matrix q = amla::draw_bf16_matrix(2, 3, kGauss1, 31);
  Matrix k(4, 3), v(4, 2);
  const Matrix krow = amla::draw_bf16_matrix(1, 3, kGauss1, 32);
  for (int r = 0; r < 4; ++r) k.row(r) = krow.row(0);
  v << 1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f, 7.0f, 8.0f;
  const Matrix o = amla::golden_attention(q, k, v);
  for (int r = 0; r < 2; ++r) {
    CHECK(o(r, 0) == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(o(r, 1) == doctest::Approx(5.0).epsilon(1e-6));
  }
}

TEST_CASE("shape and config validation") {
  AttentionConfig cfg;
  cfg.g = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = AttentionConfig{};
  cfg.kv_block = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  cfg = AttentionConfig{};
  cfg.g = 2;
  cfg.dk = 3;
  cfg.dv = 2;
  cfg.s2 = 8;
  cfg.kv_block = 4;
  const Matrix q = Matrix::Zero(2, 3);
  const Matrix k = Matrix::Zero(7, 3);  // wrong s2
  const Matrix v = Matrix::Zero(7, 2);
  CHECK_THROWS_AS(amla::base_attention(q, k, v, cfg), std::invalid_argument);
  CHECK_THROWS_AS(amla::amla_attention(q, k, v, cfg), std::invalid_argument);
  CHECK_THROWS_AS(amla::golden_attention(Matrix::Zero(2, 4), k, v),
                  std::invalid_argument);
}

TEST_CASE("single block skips the rescale and matches base closely") {
  AttentionConfig cfg;
  cfg.g = 4;
  cfg.dk = 16;
  cfg.dv = 8;
  cfg.s2 = 32;
  cfg.kv_block = 64;  // one short block
  const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, kGauss1, 41);
  const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, kGauss1, 42);
  const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, kUnitPos, 43);

  const Matrix base = amla::base_attention(q, k, v, cfg);
  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);

  CHECK(diag.blocks == 1);
  CHECK(diag.clamp_activations == 0);
  CHECK(diag.zero_guard_hits == 0);
  CHECK(diag.exponent_wraps == 0);
  REQUIRE(diag.eps.size() == 1);
  for (Eigen::Index r = 0; r < cfg.g; ++r) CHECK(diag.eps[0](r) == 0.0f);

  for (Eigen::Index r = 0; r < cfg.g; ++r)
    for (Eigen::Index c = 0; c < cfg.dv; ++c)
      CHECK(std::fabs(static_cast<double>(o(r, c)) - base(r, c)) <=
            2.0 * bf16_ulp(base(r, c)));
}

TEST_CASE("duplicated block content cancels all rescale deltas") {
  AttentionConfig cfg;
  cfg.g = 4;
  cfg.dk = 8;
  cfg.dv = 8;
  cfg.s2 = 64;
  cfg.kv_block = 32;
  const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, kGauss1, 51);
  const Matrix khalf = amla::draw_bf16_matrix(32, cfg.dk, kGauss1, 52);
  const Matrix vhalf = amla::draw_bf16_matrix(32, cfg.dv, kGauss1, 53);
  Matrix k(64, cfg.dk), v(64, cfg.dv);
  k << khalf, khalf;
  v << vhalf, vhalf;

  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
  REQUIRE(diag.n.size() == 2);
  for (Eigen::Index r = 0; r < cfg.g; ++r) {
    CHECK(diag.n[1](r) == diag.n[0](r));
    CHECK(diag.c[1](r) == diag.c[0](r));
    CHECK(diag.eps[1](r) == 0.0f);
  }
  const Matrix base = amla::base_attention(q, k, v, cfg);
  CHECK(amla::rel_frobenius_error(o, base) < 1e-2);
}

TEST_CASE("truncating blocks equals running on truncated inputs bitwise") {
  AttentionConfig cfg;
  cfg.g = 6;
  cfg.dk = 16;
  cfg.dv = 12;
  cfg.s2 = 256;
  cfg.kv_block = 64;
  const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, kGauss1, 61);
  const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, kGauss1, 62);
  const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, kGauss1, 63);

  for (amla::Index j = 1; j <= 3; ++j) {
    AttentionConfig tcfg = cfg;
    tcfg.s2 = j * cfg.kv_block;
    const Matrix kt = k.topRows(tcfg.s2);
    const Matrix vt = v.topRows(tcfg.s2);

    CHECK(bitwise_equal(amla::base_attention(q, k, v, cfg, j),
                        amla::base_attention(q, kt, vt, tcfg)));

    amla::AmlaOptions opts;
    opts.max_blocks = j;
    const Matrix full = amla::amla_attention(q, k, v, cfg, opts).first;
    const Matrix part = amla::amla_attention(q, kt, vt, tcfg).first;
    CHECK(bitwise_equal(full, part));
  }
}

TEST_CASE("atomic add order leaves integer offsets untouched") {
  AttentionConfig cfg;
  cfg.g = 5;
  cfg.dk = 16;
  cfg.dv = 8;
  cfg.s2 = 192;
  cfg.kv_block = 64;
  const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, kGauss1, 71);
  const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, kGauss1, 72);
  const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, kUnitPos, 73);

  amla::AmlaOptions a;
  a.atomic_chunks = 4;
  a.atomic_order_seed = 42;
  const auto [oa, da] = amla::amla_attention(q, k, v, cfg, a);

  // Same seed replays the same permutation, bit for bit.
  const auto [ob, db] = amla::amla_attention(q, k, v, cfg, a);
  CHECK(bitwise_equal(oa, ob));

  amla::AmlaOptions cseq;  // sequential accumulation
  const auto [oc, dc] = amla::amla_attention(q, k, v, cfg, cseq);

  amla::AmlaOptions d = a;
  d.atomic_order_seed = 43;
  const auto [od, dd] = amla::amla_attention(q, k, v, cfg, d);

  // The rescale offsets depend only on the softmax statistics, so the
  // diagnostic traces are identical whatever the add order was.
  for (size_t blk = 0; blk < da.n.size(); ++blk) {
    for (Eigen::Index r = 0; r < cfg.g; ++r) {
      CHECK(da.n[blk](r) == dd.n[blk](r));
      CHECK(da.n[blk](r) == dc.n[blk](r));
      CHECK(amla::as_int32(da.eps[blk](r)) == amla::as_int32(dd.eps[blk](r)));
      CHECK(amla::as_int32(da.c[blk](r)) == amla::as_int32(dc.c[blk](r)));
    }
  }

  CHECK(amla_test::max_ulp_distance(oa, od) <= 2);
  CHECK(amla_test::max_ulp_distance(oa, oc) <= 2);
}

TEST_CASE("diagnostics invariants on a random multi-block run") {
  AttentionConfig cfg;
  cfg.g = 8;
  cfg.dk = 32;
  cfg.dv = 16;
  cfg.s2 = 256;
  cfg.kv_block = 64;
  const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, kGauss25, 81);
  const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, kGauss25, 82);
  const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, kGauss25, 83);

  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
  CHECK(diag.finite);
  CHECK(diag.blocks == 4);
  CHECK(diag.max_exp_argument <= 88.0f);
  const double rt2 = std::sqrt(2.0);
  CHECK(diag.min_r >= 1.0 / rt2 * (1.0 - 1e-6));
  CHECK(diag.max_r <= rt2 * (1.0 + 1e-6));
  CHECK(diag.clamp_activations == 0);
  CHECK(diag.exponent_wraps == 0);

  for (size_t blk = 1; blk < diag.n.size(); ++blk)
    for (Eigen::Index r = 0; r < cfg.g; ++r)
      CHECK(diag.n[blk](r) <= diag.n[blk - 1](r));  // running max never drops

  const double tight = 0.00390625 * 1.01;  // half a BF16 ulp, padded
  for (const auto& c : diag.c)
    for (Eigen::Index r = 0; r < cfg.g; ++r)
      CHECK(std::fabs(static_cast<double>(c(r)) - 1.0) <= tight);

  const Matrix base = amla::base_attention(q, k, v, cfg);
  const Matrix golden = amla::golden_attention(q, k, v);
  const double eb = amla::rel_frobenius_error(base, golden);
  const double ea = amla::rel_frobenius_error(o, golden);
  CHECK(amla::rel_frobenius_error(o, base) <= 10.0 * std::max(eb, ea));
}

TEST_CASE("random small configs track the golden reference") {
  struct Shape {
    amla::Index g, dk, dv, s2, kv_block;
  };
  const Shape shapes[] = {{1, 1, 1, 3, 1},   {2, 4, 4, 16, 8},
                          {8, 16, 8, 96, 32}, {16, 32, 16, 256, 64},
                          {3, 8, 24, 130, 64}, {5, 24, 4, 64, 16}};
  int idx = 0;
  for (const Shape& sh : shapes) {
    for (const auto& dist : {kGauss1, kGauss25}) {
      AttentionConfig cfg;
      cfg.g = sh.g;
      cfg.dk = sh.dk;
      cfg.dv = sh.dv;
      cfg.s2 = sh.s2;
      cfg.kv_block = sh.kv_block;
      const uint32_t s = 100 + 3 * idx++;
      const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, dist, s);
      const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, dist, s + 1);
      const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, dist, s + 2);

      const Matrix golden = amla::golden_attention(q, k, v);
      const Matrix base = amla::base_attention(q, k, v, cfg);
      const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
      CHECK(diag.finite);
      CHECK(amla::rel_frobenius_error(base, golden) < 1e-2);
      CHECK(amla::rel_frobenius_error(o, golden) < 1e-2);
      CHECK(amla::rel_frobenius_error(o, base) < 1e-2);
    }
  }
}

TEST_CASE("unshifted exponentials overflow where the shifted kernels survive") {
  // Constant rows push every scaled logit to 2 * 7 * 6.875 = 96.25 or
  // 2 * 7 * 7 = 98, both beyond the fp32 exp limit.
  const amla::Index dk = 4, s2 = 32, g = 2, dv = 3;
  Matrix q = Matrix::Constant(g, dk, 7.0f);
  Matrix k(s2, dk);
  for (amla::Index r = 0; r < s2; ++r)
    k.row(r).setConstant(r < s2 / 2 ? 7.0f : 6.875f);
  const Matrix v = amla::draw_bf16_matrix(s2, dv, kGauss1, 91);

  const Matrix naive = amla_test::naive_unshifted_attention(q, k, v, 16);
  CHECK(!naive.allFinite());

  AttentionConfig cfg;
  cfg.g = g;
  cfg.dk = dk;
  cfg.dv = dv;
  cfg.s2 = s2;
  cfg.kv_block = 16;
  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
  CHECK(diag.finite);
  CHECK(o.allFinite());
  CHECK(diag.max_exp_argument <= 88.0f);
  const Matrix golden = amla::golden_attention(q, k, v);
  CHECK(amla::rel_frobenius_error(o, golden) < 1e-2);
  CHECK(amla::rel_frobenius_error(amla::base_attention(q, k, v, cfg), golden) <
        1e-2);
}

TEST_CASE("underflowing rescale saturates the element to zero") {
  // Block 1 leaves o = 2^-126 (exponent field 1); block 2 raises the row
  // max by 50, so the clamped -30 offset would push the exponent field
  // negative. The element must flush to zero, not wrap.
  AttentionConfig cfg;
  cfg.g = 1;
  cfg.dk = 1;
  cfg.dv = 1;
  cfg.s2 = 2;
  cfg.kv_block = 1;
  Matrix q(1, 1), k(2, 1), v(2, 1);
  q << 1.0f;
  k << 0.0f, 50.0f;
  v << std::ldexp(1.0f, -126), 1.0f;

  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
  CHECK(diag.clamp_activations == 1);
  CHECK(diag.exponent_wraps == 1);
  CHECK(diag.zero_guard_hits == 0);
  CHECK(o.allFinite());
  // The flushed contribution is exp(-50) * 2^-126, far below fp32 reach.
  const Matrix golden = amla::golden_attention(q, k, v);
  CHECK(std::fabs(o(0, 0) - golden(0, 0)) <= 1e-6f);
  const Matrix base = amla::base_attention(q, k, v, cfg);
  CHECK(std::fabs(o(0, 0) - base(0, 0)) <= 1e-6f);
}

TEST_CASE("wide logit spreads stay accurate across many blocks") {
  // Large element ranges make the running row max jump between blocks, so
  // the exponent shift clamp fires repeatedly. The fused pipeline must keep
  // tracking the baseline through those events.
  AttentionConfig cfg;
  cfg.g = 32;
  cfg.dk = 64;
  cfg.dv = 64;
  cfg.s2 = 4096;
  cfg.kv_block = 256;
  const amla::DistributionSpec wide =
      amla::DistributionSpec::parse("uniform:-20:20");
  int64_t clamps = 0;
  for (uint32_t seed : {301u, 302u, 303u}) {
    const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, wide, seed);
    const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, wide, seed + 50);
    const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, wide, seed + 100);
    const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
    CHECK(diag.finite);
    CHECK(o.allFinite());
    clamps += diag.clamp_activations;
    const Matrix base = amla::base_attention(q, k, v, cfg);
    CHECK(amla::rel_frobenius_error(o, base) < 1e-2);
  }
  CHECK(clamps > 0);
}

TEST_CASE("saturating rescale keeps a production-size run accurate") {
  // At this size and spread one accumulator element lands below the
  // representable exponent range during a clamped rescale. Letting the
  // integer add wrap used to corrupt the whole output tensor; the element
  // must saturate to zero and leave the rest of the result intact.
  AttentionConfig cfg;
  cfg.g = 128;
  cfg.dk = 576;
  cfg.dv = 512;
  cfg.s2 = 8192;
  cfg.kv_block = 512;
  amla::Rng rng(2842004943u);
  const auto draw = [&rng](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index j = 0; j < cols; ++j) m(r, j) = rng.uniform(-20.f, 20.f);
    return amla::round_to_bf16(m);
  };
  const Matrix q = draw(cfg.g, cfg.dk);
  const Matrix k = draw(cfg.s2, cfg.dk);
  const Matrix v = draw(cfg.s2, cfg.dv);
  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
  CHECK(diag.exponent_wraps >= 1);
  CHECK(diag.finite);
  CHECK(o.allFinite());
  const Matrix base = amla::base_attention(q, k, v, cfg);
  CHECK(amla::rel_frobenius_error(o, base) < 1e-2);
}

TEST_CASE("non-finite inputs are reported through diagnostics") {
  AttentionConfig cfg;
  cfg.g = 2;
  cfg.dk = 4;
  cfg.dv = 2;
  cfg.s2 = 8;
  cfg.kv_block = 4;
  Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, kGauss1, 95);
  const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, kGauss1, 96);
  const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, kGauss1, 97);
  q(0, 0) = std::numeric_limits<float>::quiet_NaN();
  const auto [o, diag] = amla::amla_attention(q, k, v, cfg);
  CHECK(!diag.finite);
}

TEST_CASE("compensation orientations only differ through epsilon") {
  AttentionConfig cfg;
  cfg.g = 4;
  cfg.dk = 16;
  cfg.dv = 8;
  cfg.s2 = 128;
  cfg.kv_block = 32;
  const Matrix q = amla::draw_bf16_matrix(cfg.g, cfg.dk, kGauss1, 98);
  const Matrix k = amla::draw_bf16_matrix(cfg.s2, cfg.dk, kGauss1, 99);
  const Matrix v = amla::draw_bf16_matrix(cfg.s2, cfg.dv, kGauss1, 100);

  amla::AmlaOptions lit;
  lit.compensation = amla::RescaleCompensation::kAlgorithmLiteral;
  const auto [ol, dl] = amla::amla_attention(q, k, v, cfg, lit);
  const auto [od, dd] = amla::amla_attention(q, k, v, cfg);

  CHECK(dl.finite);
  CHECK(dd.finite);
  for (size_t blk = 0; blk < dl.n.size(); ++blk)
    for (Eigen::Index r = 0; r < cfg.g; ++r) {
      CHECK(dl.n[blk](r) == dd.n[blk](r));
      CHECK(dl.c[blk](r) == dd.c[blk](r));
      if (blk > 0 && dl.eps[blk](r) != 0.0f)
        CHECK(dl.eps[blk](r) == doctest::Approx(-dd.eps[blk](r)).epsilon(1e-2));
    }
  const Matrix golden = amla::golden_attention(q, k, v);
  CHECK(amla::rel_frobenius_error(ol, golden) < 1e-2);
  CHECK(amla::rel_frobenius_error(od, golden) < 1e-2);
}

}  // TEST_SUITE
