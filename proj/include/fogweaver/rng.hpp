#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace fogweaver {

// splitmix64 step; used to spread user seeds and derive substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Derives a decorrelated seed for a named substream (worker streams, topology
// vs problem vs GA streams, per-repetition run seeds).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t state = base ^ fnv1a64(tag);
  std::uint64_t out = splitmix64(state);
  out ^= splitmix64(state);
  return out;
}

// Deterministic RNG stream. mt19937_64 is bit-identical on every conforming
// implementation; the uniform helpers below avoid std::uniform_*_distribution,
// whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform over [0, n). Rejection sampling keeps it unbiased.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % static_cast<std::uint64_t>(n);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % static_cast<std::uint64_t>(n));
  }

  // Uniform over the inclusive integer interval [lo, hi].
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_index(static_cast<std::size_t>(hi - lo) + 1));
  }

  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool coin() { return (next_u64() & 1ull) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace fogweaver
