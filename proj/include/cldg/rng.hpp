#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "cldg/common.hpp"

namespace cldg {

// SplitMix64 generator. Hand-rolled (not std::mt19937 + std::*_distribution)
// so that every stream is platform-independent and bit-reproducible: the
// standard distributions are implementation-defined, which would break the
// fixed-seed determinism contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent substream keyed by (seed, ids...). Each id is folded through
  // the SplitMix64 finalizer so (1,2) and (2,1) land in unrelated streams.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = mix(seed ^ 0x9e3779b97f4a7c15ull);
    for (std::uint64_t id : ids) s = mix(s ^ mix(id + 0x632be59bd9b4e019ull));
    return Rng(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform in [0, 1): 53 random mantissa bits.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // Uniform integer in [0, n); unbiased via rejection (Lemire).
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw UsageError("uniform_index: n must be positive");
    while (true) {
      std::uint64_t x = next_u64();
      __uint128_t m = static_cast<__uint128_t>(x) * n;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo < n) {
        std::uint64_t threshold = (0 - n) % n;
        if (lo < threshold) continue;
      }
      return static_cast<std::uint64_t>(m >> 64);
    }
  }

  // k distinct values from [0, n), ascending. Partial Fisher-Yates.
  std::vector<Index> sample_without_replacement(Index n, Index k) {
    if (k < 0 || n < 0 || k > n)
      throw UsageError("sample_without_replacement: need 0 <= k <= n");
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    partial_shuffle(pool, k);
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  // Shuffle the first k slots of v (Fisher-Yates over the whole range).
  template <typename T>
  void partial_shuffle(std::vector<T>& v, Index k) {
    auto n = static_cast<Index>(v.size());
    for (Index i = 0; i < k && i + 1 < n; ++i) {
      auto j = i + static_cast<Index>(uniform_index(static_cast<std::uint64_t>(n - i)));
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    partial_shuffle(v, static_cast<Index>(v.size()));
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace cldg
