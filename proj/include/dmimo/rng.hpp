// SPDX-License-Identifier: Apache-2.0
//
// dmimo-workbench: distributed-MIMO power allocation and robustness toolkit
// Copyright (C) 2026 the dmimo-workbench contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef DMIMO_RNG_HPP
#define DMIMO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace dmimo {

// Purpose salts for deriving independent streams from one master seed.
// Each (seed, salt, index) triple names its own stream, so any piece of the
// pipeline can be re-generated in isolation and in parallel.
enum class StreamPurpose : std::uint64_t {
  kUePositions = 0x11,
  kShadowing = 0x12,
  kWeightInit = 0x21,
  kShuffle = 0x22,
  kValSplit = 0x23,
  kGaussianAttack = 0x31,
  kUapPool = 0x32,
  kMaskPerm = 0x33,
  kEvalUePositions = 0x41,
  kEvalShadowing = 0x42,
  kBootstrap = 0x43,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic counter-based stream. The generator is mt19937_64 but all
// variate transforms are done here so output bits do not depend on the
// standard library's distribution implementations.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index = 0) {
    std::uint64_t s = master_seed;
    splitmix64(s);
    s ^= static_cast<std::uint64_t>(purpose);
    splitmix64(s);
    s ^= index;
    engine_.seed(splitmix64(s));
  }

  std::uint64_t next_u64() { return engine_(); }

  // in [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    // Lemire-style rejection to stay unbiased.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t thresh = (0ULL - n) % n;
      while (lo < thresh) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    // keep log() off exact zero
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Deterministic Fisher-Yates shuffle.
  template <typename Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(c[i - 1], c[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dmimo

#endif  // DMIMO_RNG_HPP
