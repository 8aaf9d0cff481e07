// Copyright 2026 The privtrain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVTRAIN_RNG_HPP_
#define PRIVTRAIN_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <optional>

namespace privtrain {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// The 64-bit seed is the key; the 128-bit counter is split into a 64-bit
// stream id (high words) and a 64-bit block index (low words), so any number
// of independent sub-streams can be derived without sharing state.
class Philox4x32 {
 public:
  using Block = std::array<uint32_t, 4>;

  static Block Generate(uint64_t key, uint64_t stream, uint64_t block) {
    Block ctr = {static_cast<uint32_t>(block), static_cast<uint32_t>(block >> 32),
                 static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)};
    uint32_t k0 = static_cast<uint32_t>(key);
    uint32_t k1 = static_cast<uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = uint64_t{kM0} * ctr[0];
      const uint64_t p1 = uint64_t{kM1} * ctr[2];
      ctr = {static_cast<uint32_t>(p1 >> 32) ^ ctr[1] ^ k0, static_cast<uint32_t>(p1),
             static_cast<uint32_t>(p0 >> 32) ^ ctr[3] ^ k1, static_cast<uint32_t>(p0)};
      k0 += kW0;
      k1 += kW1;
    }
    return ctr;
  }

 private:
  static constexpr uint32_t kM0 = 0xD2511F53u;
  static constexpr uint32_t kM1 = 0xCD9E8D57u;
  static constexpr uint32_t kW0 = 0x9E3779B9u;
  static constexpr uint32_t kW1 = 0xBB67AE85u;
};

inline uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Purpose tags for sub-streams. Values are part of the reproducibility
// contract; do not renumber.
enum class StreamPurpose : uint64_t {
  kSampling = 1,
  kNoise = 2,
  kInit = 3,
  kFeedback = 4,
  kShuffle = 5,
  kAggregation = 6,
  kAugment = 7,
  kData = 8,
};

// A single-owner random stream. Copying a stream copies its position; use
// Fork() to obtain statistically independent children.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream_id = 0)
      : key_(seed), stream_(stream_id) {}

  RngStream Fork(uint64_t tag) const {
    return RngStream(key_, SplitMix64(stream_ ^ SplitMix64(tag + 0x632BE59BD9B4E019ull)));
  }

  RngStream Fork(std::initializer_list<uint64_t> tags) const {
    RngStream s = *this;
    for (uint64_t t : tags) s = s.Fork(t);
    return s;
  }

  RngStream Fork(StreamPurpose purpose) const {
    return Fork(static_cast<uint64_t>(purpose));
  }

  uint32_t NextU32() {
    if (lane_ == 4) {
      buffer_ = Philox4x32::Generate(key_, stream_, block_++);
      lane_ = 0;
    }
    return buffer_[lane_++];
  }

  uint64_t NextU64() {
    const uint64_t hi = NextU32();
    return (hi << 32) | NextU32();
  }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(NextU64() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n), unbiased by rejection.
  uint64_t UniformInt(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = NextU64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double Normal() {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double u1 = 1.0 - Uniform();  // (0, 1]
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
  }

  uint64_t seed() const { return key_; }
  uint64_t stream_id() const { return stream_; }

 private:
  uint64_t key_;
  uint64_t stream_;
  uint64_t block_ = 0;
  Philox4x32::Block buffer_{};
  int lane_ = 4;
  std::optional<double> spare_;
};

}  // namespace privtrain

#endif  // PRIVTRAIN_RNG_HPP_
