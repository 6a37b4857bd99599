#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace jdqml {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output function (Steele/Lea/Flood 2014, fixed-increment
/// variant by Vigna). Bijective mix of a 64-bit counter.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: state advances by a fixed odd increment, the
/// output is mix64 of the counter. Streams can be skipped in O(1).
class SplitMix64 {
 public:
  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t operator()() { return mix64(state_ += kGoldenGamma); }

  void discard(std::uint64_t n) { state_ += n * kGoldenGamma; }

 private:
  std::uint64_t state_ = 0;
};

/// Derives the root seed of an independent stream from (base, key1, key2).
/// Used for burn-in vs. path streams and for per-replication streams in
/// Monte Carlo studies; the derivation is order-independent so replications
/// can run in parallel with any schedule.
inline constexpr std::uint64_t stream_seed(std::uint64_t base, std::uint64_t key1,
                                           std::uint64_t key2 = 0) {
  return mix64(mix64(base + kGoldenGamma * (key1 + 1)) + kGoldenGamma * (key2 + 1));
}

// Stream tags used by the simulator.
inline constexpr std::uint64_t kPathStreamTag = 0;
inline constexpr std::uint64_t kBurnInStreamTag = 1;

/// Double-precision draws on top of SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1), never returns an endpoint.
  double uniform_open() {
    return (static_cast<double>(gen_() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Standard normal via Box-Muller; the second deviate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }

 private:
  SplitMix64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace jdqml
