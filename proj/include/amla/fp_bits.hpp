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

#ifndef AMLA_FP_BITS_HPP_
#define AMLA_FP_BITS_HPP_

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

// Bit-level FP32 primitives: the IEEE 754 binary32 <-> int32 correspondence
// and the exponent-offset tricks built on it. Everything here is exact
// integer/bit arithmetic; no floating-point rounding is involved except in
// fp32_to_bf16, which rounds to nearest-even by construction.
namespace amla {

inline constexpr uint32_t kFp32SignMask = 0x80000000u;
inline constexpr uint32_t kFp32ExpMask = 0x7f800000u;
inline constexpr uint32_t kFp32MantMask = 0x007fffffu;
inline constexpr int kFp32MantBits = 23;
inline constexpr int32_t kFp32ExpUnit = 1 << kFp32MantBits;  // one exponent step

struct Fp32Parts {
  uint32_t sign;      // 1 bit
  uint32_t exponent;  // 8 bits, biased
  uint32_t mantissa;  // 23 bits
};

inline int32_t as_int32(float f) { return std::bit_cast<int32_t>(f); }
inline float as_fp32(int32_t i) { return std::bit_cast<float>(i); }

inline Fp32Parts fp32_parts(float f) {
  const uint32_t u = std::bit_cast<uint32_t>(f);
  return Fp32Parts{u >> 31, (u & kFp32ExpMask) >> kFp32MantBits,
                   u & kFp32MantMask};
}

inline float fp32_from_parts(const Fp32Parts& p) {
  return std::bit_cast<float>((p.sign << 31) | (p.exponent << kFp32MantBits) |
                              (p.mantissa & kFp32MantMask));
}

// Normal means 0 < E < 255: neither zero/subnormal nor inf/NaN.
inline bool is_normal_fp32(float f) {
  const uint32_t e = fp32_parts(f).exponent;
  return e != 0 && e != 255;
}

// Multiplies a normal FP32 value by 2^n through a single int32 addition on the
// bit pattern. Valid exactly when the scaled exponent stays in normal range,
// i.e. -E < n < 255 - E; the bounds are checked and violations throw, because
// outside that window the bit pattern walks into the sign bit or the
// inf/NaN/subnormal encodings.
inline float mul_pow2_via_int_add(float f, int n) {
  const int e = static_cast<int>(fp32_parts(f).exponent);
  if (e == 0 || e == 255) {
    throw std::domain_error(
        "mul_pow2_via_int_add: f must be normal (0 < E < 255), got E=" +
        std::to_string(e));
  }
  if (n <= -e) {
    throw std::domain_error("mul_pow2_via_int_add: n <= -E underflows (n=" +
                            std::to_string(n) + ", E=" + std::to_string(e) +
                            ")");
  }
  if (n >= 255 - e) {
    throw std::domain_error("mul_pow2_via_int_add: n >= 255 - E overflows (n=" +
                            std::to_string(n) + ", E=" + std::to_string(e) +
                            ")");
  }
  return as_fp32(as_int32(f) + n * kFp32ExpUnit);
}

// Raw exponent-field addition with a guard for +/-0: zero's bit pattern has
// E = 0 and adding an offset would fabricate a nonzero value, so zero passes
// through unchanged. Out-of-range offsets on nonzero inputs are the caller's
// responsibility (callers that care count them, see AmlaDiagnostics).
inline float guarded_exponent_add(float f, int32_t delta_fixed) {
  const int32_t bits = as_int32(f);
  if ((bits & 0x7fffffff) == 0) return f;
  return as_fp32(bits + delta_fixed);
}

// Rounds an FP32 value to the nearest BF16 (8-bit exponent, 7-bit mantissa,
// ties to even) and returns it widened back to FP32, so the result is an FP32
// value whose low 16 bits are zero. NaN stays NaN (quiet bit forced); the
// rounding carry naturally promotes overflowing values to infinity.
inline float fp32_to_bf16(float f) {
  uint32_t u = std::bit_cast<uint32_t>(f);
  if ((u & kFp32ExpMask) == kFp32ExpMask) {
    if (u & kFp32MantMask) u |= 0x00400000u;  // quiet NaN, payload kept
    return std::bit_cast<float>(u & 0xffff0000u);
  }
  u += 0x7fffu + ((u >> 16) & 1u);
  return std::bit_cast<float>(u & 0xffff0000u);
}

// True when f already is a widened BF16 value (round-trips unchanged).
inline bool is_bf16_value(float f) {
  const uint32_t u = std::bit_cast<uint32_t>(f);
  if ((u & 0xffffu) != 0) return false;
  const uint32_t r = std::bit_cast<uint32_t>(fp32_to_bf16(f));
  return (r & 0xffff0000u) == (u & 0xffff0000u);
}

}  // namespace amla

#endif  // AMLA_FP_BITS_HPP_
