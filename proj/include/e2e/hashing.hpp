// Copyright 2026 The E2E Engine Authors
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

#ifndef E2E_HASHING_HPP_
#define E2E_HASHING_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace e2e {

// splitmix64: tiny, fast, and statistically solid for keyed streams.
// Every randomized decision in the pipeline runs off one of these, seeded
// through mix_key, so results never depend on scheduling or call order.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased-enough index draw via the multiply-shift trick.
  uint64_t next_below(uint64_t n) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller, cosine branch only. Consumes exactly two uint64 draws per
  // call, which keeps gaussian streams reproducible across platforms.
  double next_gaussian() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  uint64_t state_;
};

inline uint64_t fnv1a64(std::string_view s,
                        uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Uint128 {
  uint64_t hi = 0;
  uint64_t lo = 0;

  friend bool operator==(const Uint128&, const Uint128&) = default;
  friend auto operator<=>(const Uint128&, const Uint128&) = default;
};

// FNV-1a with the 128-bit offset basis and prime (2^88 + 2^8 + 0x3b).
inline Uint128 fnv1a128(std::string_view s) {
  using u128 = unsigned __int128;
  u128 h = (static_cast<u128>(0x6C62272E07BB0142ULL) << 64) |
           0x62B821756295C58DULL;
  const u128 prime = (static_cast<u128>(1) << 88) | 0x13BULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= prime;
  }
  return Uint128{static_cast<uint64_t>(h >> 64), static_cast<uint64_t>(h)};
}

inline std::string to_hex(Uint128 v) {
  static const char* kDigits = "0123456789abcdef";
  std::string out(32, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kDigits[v.hi & 0xF];
    v.hi >>= 4;
  }
  for (int i = 31; i >= 16; --i) {
    out[i] = kDigits[v.lo & 0xF];
    v.lo >>= 4;
  }
  return out;
}

// Derives the seed of a per-entity random stream from the global seed, an
// entity id, and a salt naming the decision. Streams with different salts
// are independent even for the same entity.
inline uint64_t mix_key(uint64_t seed, std::string_view id,
                        std::string_view salt = {}) {
  uint64_t h = fnv1a64(id);
  h = fnv1a64("\x1f", h);
  h = fnv1a64(salt, h);
  return h ^ (seed * 0x9E3779B97F4A7C15ULL);
}

}  // namespace e2e

#endif  // E2E_HASHING_HPP_
