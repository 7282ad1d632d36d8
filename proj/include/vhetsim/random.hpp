// Copyright 2026 The vhetsim Authors
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

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string_view>

namespace vhetsim {

// 64-bit finalizer from the SplitMix64 generator. Used both for seed
// derivation and for hashing mix-in words into a seed stream.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a master seed plus a list of
// distinguishing words (trial index, axis value bits, subsystem tags...).
// Every distinct word list maps to a statistically independent seed.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> words) {
  std::uint64_t x = mix64(master + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t w : words) {
    x = mix64(x ^ (w + 0x9e3779b97f4a7c15ULL));
  }
  return x;
}

// FNV-1a, for turning tag strings ("scenario", axis names) into seed words.
inline std::uint64_t hash_tag(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Bit pattern of a double, so real-valued axis points can enter a seed.
inline std::uint64_t bits_of(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

// Deterministic random source. std::mt19937_64 is bit-exact across
// platforms; the distribution layers below are written out explicitly
// because the standard library's distribution algorithms are
// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Standard normal via Box-Muller. The 1 - u mapping keeps the log
  // argument in (0, 1], so no rejection loop is needed and every call
  // consumes exactly two generator words.
  double normal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circularly-symmetric complex normal with E[|z|^2] = 1
  // (real and imaginary parts i.i.d. N(0, 1/2)).
  std::complex<double> cnormal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * std::numbers::pi * u2),
            r * std::sin(2.0 * std::numbers::pi * u2)};
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace vhetsim
