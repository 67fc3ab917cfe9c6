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
#include "amla/tensor.hpp"
#include "doctest.h"
#include "test_support.hpp"

namespace {

using amla::Matrix;
using amla::Vector;

Matrix make2x2(float a, float b, float c, float d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (amla::as_int32(a(r, c)) != amla::as_int32(b(r, c))) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("tensor") {

TEST_CASE("matmul_fp32 fixed values") {
  const Matrix a = make2x2(1, 2, 3, 4);
  const Matrix b = make2x2(5, 6, 7, 8);
  const Matrix c = amla::matmul_fp32(a, b);
  CHECK(c(0, 0) == 19.0f);
  CHECK(c(0, 1) == 22.0f);
  CHECK(c(1, 0) == 43.0f);
  CHECK(c(1, 1) == 50.0f);

  // Same product through the transposed-rhs path.
  const Matrix bt = make2x2(5, 7, 6, 8);
  CHECK(bitwise_equal(amla::matmul_fp32(a, bt, true), c));
}

TEST_CASE("matmul shape checks") {
  Matrix a(2, 3), b(2, 2);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(amla::matmul_fp32(a, b), std::invalid_argument);
  CHECK_THROWS_AS(amla::matmul_fp32(a, b, true), std::invalid_argument);
  CHECK_THROWS_AS(amla::matmul_mixed(a, b), std::invalid_argument);
}

TEST_CASE("rel_frobenius_error") {
  Matrix a(1, 2), z(1, 2);
  a << 3.0f, 4.0f;
  z.setZero();
  CHECK(amla::rel_frobenius_error(a, z) == doctest::Approx(5e10).epsilon(1e-9));
  CHECK(amla::rel_frobenius_error(a, a) == 0.0);
  CHECK(amla::rel_frobenius_error(z, z) == 0.0);
  // Symmetry of the zero case regardless of denominator choice.
  CHECK((amla::rel_frobenius_error(a, z) == 0.0) ==
        (amla::rel_frobenius_error(z, a) == 0.0));
  CHECK_THROWS_AS(amla::rel_frobenius_error(a, Matrix::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("round_to_bf16 and is_bf16_widened") {
  Matrix m(1, 3);
  m << 1.00390625f, 1.01171875f, -0.0f;
  const Matrix r = amla::round_to_bf16(m);
  CHECK(r(0, 0) == 1.0f);
  CHECK(r(0, 1) == 1.015625f);
  CHECK(amla::as_int32(r(0, 2)) == amla::as_int32(-0.0f));
  CHECK(amla::is_bf16_widened(r));
  CHECK(!amla::is_bf16_widened(m));
}

TEST_CASE("matmul_mixed equals matmul_fp32 on widened inputs") {
  const amla::DistributionSpec dist{amla::DistributionSpec::Kind::kGaussian,
                                    4.0, 0.0};
  const Matrix a = amla::draw_bf16_matrix(9, 17, dist, 11);
  const Matrix b = amla::draw_bf16_matrix(17, 13, dist, 12);
  REQUIRE(amla::is_bf16_widened(a));
  REQUIRE(amla::is_bf16_widened(b));
  CHECK(bitwise_equal(amla::matmul_mixed(a, b), amla::matmul_fp32(a, b)));

  const Matrix bt = amla::draw_bf16_matrix(13, 17, dist, 13);
  CHECK(bitwise_equal(amla::matmul_mixed(a, bt, true),
                      amla::matmul_fp32(a, bt, true)));
}

TEST_CASE("matmul_mixed rounding deviation is bounded") {
  amla::Rng rng(amla::derive_seed(3, 0x6d6dull, 0));
  Matrix a(7, 33), b(33, 5);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      a(r, c) = static_cast<float>(rng.gaussian(1.0));
  for (Eigen::Index r = 0; r < b.rows(); ++r)
    for (Eigen::Index c = 0; c < b.cols(); ++c)
      b(r, c) = static_cast<float>(rng.gaussian(1.0));

  const Matrix got = amla::matmul_mixed(a, b);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      double ref = 0.0, abs_sum = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        ref += static_cast<double>(a(r, k)) * static_cast<double>(b(k, c));
        abs_sum += std::fabs(static_cast<double>(a(r, k))) *
                   std::fabs(static_cast<double>(b(k, c)));
      }
      // Two BF16 roundings per product plus accumulation slack.
      const double bound = 2.5 / 256.0 * abs_sum + 1e-6;
      CHECK(std::fabs(static_cast<double>(got(r, c)) - ref) <= bound);
    }
  }
}

TEST_CASE("row_softmax_stats first block") {
  Matrix s(1, 2);
  s << 0.0f, 0.0f;
  Vector prev_max(1), prev_sum(1);
  prev_max(0) = -std::numeric_limits<float>::infinity();
  prev_sum(0) = 0.0f;
  const amla::SoftmaxUpdate u = amla::row_softmax_stats(s, prev_max, prev_sum, 1.0f);
  CHECK(u.p(0, 0) == 1.0f);
  CHECK(u.p(0, 1) == 1.0f);
  CHECK(u.new_max(0) == 0.0f);
  CHECK(u.new_sum(0) == 2.0f);
  CHECK(u.scale_up(0) == 0.0f);
  CHECK(u.finite);
}

TEST_CASE("row_softmax_stats recurrence with a previous block") {
  Matrix s(1, 1);
  s << 0.0f;
  Vector prev_max(1), prev_sum(1);
  prev_max(0) = 0.0f;
  prev_sum(0) = 2.0f;
  const amla::SoftmaxUpdate u = amla::row_softmax_stats(s, prev_max, prev_sum, 1.0f);
  CHECK(u.new_max(0) == 0.0f);
  CHECK(u.scale_up(0) == 1.0f);
  CHECK(u.new_sum(0) == 3.0f);
}

TEST_CASE("row_softmax_stats halves the carryover for a ln2 max jump") {
  Matrix s(1, 1);
  s << static_cast<float>(std::log(2.0));
  Vector prev_max = Vector::Zero(1);
  Vector prev_sum = Vector::Ones(1);
  const amla::SoftmaxUpdate u = amla::row_softmax_stats(s, prev_max, prev_sum, 1.0f);
  CHECK(u.scale_up(0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("row_softmax_stats scale application") {
  Matrix s(1, 2);
  s << 2.0f, 4.0f;
  Vector prev_max(1), prev_sum(1);
  prev_max(0) = -std::numeric_limits<float>::infinity();
  prev_sum(0) = 0.0f;
  const amla::SoftmaxUpdate u = amla::row_softmax_stats(s, prev_max, prev_sum, 0.5f);
  CHECK(u.new_max(0) == 2.0f);
  CHECK(u.p(0, 1) == 1.0f);
  CHECK(u.p(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("row_softmax_stats probabilities lie in (0, 1] with a 1 per row") {
  const amla::DistributionSpec dist{amla::DistributionSpec::Kind::kGaussian,
                                    9.0, 0.0};
  const Matrix s = amla::draw_bf16_matrix(6, 24, dist, 77);
  Vector prev_max = Vector::Constant(6, -std::numeric_limits<float>::infinity());
  Vector prev_sum = Vector::Zero(6);
  const amla::SoftmaxUpdate u = amla::row_softmax_stats(s, prev_max, prev_sum, 0.25f);
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    bool hit_one = false;
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      CHECK(u.p(r, c) > 0.0f);
      CHECK(u.p(r, c) <= 1.0f);
      hit_one = hit_one || u.p(r, c) == 1.0f;
    }
    // The row attains the running max inside this block, so some entry is 1.
    CHECK(hit_one);
  }
}

TEST_CASE("row_softmax_stats folding matches one-shot within 2 ulps") {
  const amla::DistributionSpec dist{amla::DistributionSpec::Kind::kGaussian,
                                    4.0, 0.0};
  const Matrix s = amla::draw_bf16_matrix(8, 16, dist, 5);
  const float scale = 1.0f / std::sqrt(24.0f);
  Vector neg_inf = Vector::Constant(8, -std::numeric_limits<float>::infinity());
  Vector zero = Vector::Zero(8);

  const amla::SoftmaxUpdate whole = amla::row_softmax_stats(s, neg_inf, zero, scale);
  const amla::SoftmaxUpdate first =
      amla::row_softmax_stats(s.leftCols(8), neg_inf, zero, scale);
  const amla::SoftmaxUpdate second =
      amla::row_softmax_stats(s.rightCols(8), first.new_max, first.new_sum, scale);

  for (Eigen::Index r = 0; r < 8; ++r) {
    CHECK(amla::as_int32(second.new_max(r)) == amla::as_int32(whole.new_max(r)));
    CHECK(amla_test::ulp_distance(second.new_sum(r), whole.new_sum(r)) <= 2);
  }
}

TEST_CASE("row_softmax_stats flags non-finite scores") {
  Matrix s(1, 2);
  Vector prev_max(1), prev_sum(1);
  prev_max(0) = -std::numeric_limits<float>::infinity();
  prev_sum(0) = 0.0f;

  s << 0.0f, std::numeric_limits<float>::quiet_NaN();
  CHECK(!amla::row_softmax_stats(s, prev_max, prev_sum, 1.0f).finite);

  s << 0.0f, std::numeric_limits<float>::infinity();
  CHECK(!amla::row_softmax_stats(s, prev_max, prev_sum, 1.0f).finite);

  s << 0.0f, -1.0f;
  CHECK(amla::row_softmax_stats(s, prev_max, prev_sum, 1.0f).finite);
}

}  // TEST_SUITE
