// Copyright 2026 The NoiseForge Authors
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
//
// Counter-based random number generation.
//
// Algorithm: Philox-4x32-10 (Salmon, Moraes, Dror, Shaw, SC'11), the fixed
// and versioned generator of this library ("philox4x32-10 v1"). The raw
// 32-bit stream is reproducible bit-for-bit across platforms; tests pin the
// three published known-answer vectors. Changing the algorithm or the
// derived real-valued transforms below is a breaking format change.

#ifndef NOISEFORGE_RNG_HPP
#define NOISEFORGE_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace noiseforge {

/**
 * Philox-4x32-10 keyed counter generator.
 *
 * (seed, stream) select a key and the upper counter half; disjoint streams
 * never overlap, so callers can derive one independent stream per Monte
 * Carlo trial.
 */
class PhiloxRng {
 public:
  explicit PhiloxRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        block_(0),
        stream_(stream),
        index_(4),
        have_spare_(false),
        spare_(0.0) {}

  /** One keyed 10-round bijection of the 128-bit counter. */
  static std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                    std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

  std::uint32_t next_u32() {
    if (index_ >= 4) {
      std::array<std::uint32_t, 4> ctr = {
          static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
      buffer_ = philox4x32_10(ctr, key_);
      ++block_;
      index_ = 0;
    }
    return buffer_[index_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  /** Uniform double strictly inside (0, 1); both tails safe under log(). */
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /** Standard normal via Box-Muller; one spare cached per pair. */
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /** Laplace(0, b) by inverse CDF. */
  double laplace(double b) {
    double u = uniform01();
    return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u));
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t block_;
  std::uint64_t stream_;
  std::array<std::uint32_t, 4> buffer_{};
  int index_;
  bool have_spare_;
  double spare_;
};

}  // namespace noiseforge

#endif  // NOISEFORGE_RNG_HPP
