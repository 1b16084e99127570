#pragma once

// Counter-splittable pseudo-random generator built on xoshiro256++ with
// splitmix64 seeding (Blackman & Vigna). Chosen over <random> engines
// because the bit stream is fixed by this header alone -- std::mt19937_64
// is portable but std::*_distribution is not, and reproducibility of
// seeded runs across toolchains is a hard requirement here. Sampling uses
// inverse transforms only, so a (seed, stream) pair pins every draw.

#include <array>
#include <cmath>
#include <cstdint>

namespace mapkit {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  // Deterministically derives the seed of an independent stream from a
  // base seed and a path of indices (e.g. {order, instance}).
  template <typename... Ids>
  static std::uint64_t derive(std::uint64_t seed, Ids... ids) {
    std::uint64_t sm = seed;
    (void)detail::splitmix64(sm);
    ((sm ^= static_cast<std::uint64_t>(ids) + 0x9e3779b97f4a7c15ull,
      (void)detail::splitmix64(sm)),
     ...);
    return detail::splitmix64(sm);
  }

  // Child generator for sub-stream `id`; the parent state is unchanged.
  SplitRng split(std::uint64_t id) const {
    std::uint64_t sm = state_[0] ^ detail::rotl(state_[2], 17) ^ id;
    return SplitRng(detail::splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_uniform();
  }

  // Exponential with the given rate, by inverse transform.
  double next_exponential(double rate) {
    // u in [0,1) => 1-u in (0,1], log is finite, result >= 0.
    double u = next_uniform();
    return -std::log1p(-u) / rate;
  }

 private:
  std::array<std::uint64_t, 4> state_{};
};

}  // namespace mapkit
