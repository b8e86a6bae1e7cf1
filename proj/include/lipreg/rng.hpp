#pragma once

// Counter-based random streams. Every consumer derives its own stream key
// from (master seed, purpose, unit index), so work units can be evaluated in
// any order, on any number of threads, with identical results.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "lipreg/common.hpp"

namespace lipreg {

namespace detail {
inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Stream purposes. Part of the reproducibility contract: changing one
// purpose's draws never perturbs another's.
enum class StreamPurpose : std::uint64_t {
  Design = 1,
  Noise = 2,
  Eval = 3,
  Centering = 4,
  Projection = 5,
  Theta = 6,
  Smoothing = 7,
  Replication = 8,
  Pairs = 9,
  Generic = 10,
};

inline Seed derive_seed(Seed master, std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0) {
  std::uint64_t h = detail::mix64(master + detail::kGamma);
  h = detail::mix64(h ^ (a + detail::kGamma));
  h = detail::mix64(h ^ (b + 0x6a09e667f3bcc909ULL));
  h = detail::mix64(h ^ (c + 0xbb67ae8584caa73bULL));
  return h;
}

inline Seed derive_seed(Seed master, StreamPurpose p, std::uint64_t b = 0,
                        std::uint64_t c = 0) {
  return derive_seed(master, static_cast<std::uint64_t>(p), b, c);
}

// splitmix64 sequence; counter-based (state advances by a fixed gamma), so a
// stream is fully determined by its key.
class RandomStream {
 public:
  explicit RandomStream(Seed key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += detail::kGamma;
    return detail::mix64(state_);
  }

  // Uniform in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; safe for log().
  double next_uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = next_uniform_pos();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Exponential(1).
  double next_exponential() { return -std::log(next_uniform_pos()); }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace lipreg
