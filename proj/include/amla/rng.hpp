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

#ifndef AMLA_RNG_HPP_
#define AMLA_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace amla {

// Stream identifier recorded in run manifests. The generator is std::mt19937
// (algorithm fixed by the C++ standard) and the value mappings below are
// spelled out here instead of using std::*_distribution, whose outputs differ
// between standard library implementations.
inline constexpr const char* kRngStreamId = "mt19937-boxmuller-v1";

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent per-(stream, substream) seed derivation, so samples drawn in
// parallel get the same values as sequential execution.
inline uint32_t derive_seed(uint64_t base, uint64_t stream, uint64_t substream) {
  return static_cast<uint32_t>(
      splitmix64(splitmix64(base + 0x9e3779b97f4a7c15ull * stream) + substream));
}

class Rng {
 public:
  explicit Rng(uint32_t seed) : gen_(seed) {}

  uint32_t next_u32() { return gen_(); }

  // [0, 1) with 24-bit resolution; exact in FP32.
  float uniform01() {
    return static_cast<float>(next_u32() >> 8) * (1.0f / 16777216.0f);
  }

  float uniform(float a, float b) { return a + (b - a) * uniform01(); }

  // Box-Muller in double; u1 in (0,1] keeps the log finite.
  float gaussian(float sigma) {
    if (have_spare_) {
      have_spare_ = false;
      return static_cast<float>(spare_ * sigma);
    }
    const double u1 = (static_cast<double>(next_u32()) + 1.0) * (1.0 / 4294967296.0);
    const double u2 = static_cast<double>(next_u32()) * (1.0 / 4294967296.0);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586477 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return static_cast<float>(r * std::cos(t) * sigma);
  }

 private:
  std::mt19937 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace amla

#endif  // AMLA_RNG_HPP_
