#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace pha {

/// Deterministic, platform-independent random source for instance generation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distribution transforms are implemented here instead of
/// using <random>'s distributions, because those are allowed to differ
/// between standard library implementations.
///
/// Streams: a (seed, stream) pair is mixed with two rounds of splitmix64 to
/// produce the engine seed, so independent quantities of one instance (matrix
/// entries, sparsity pattern, noise, ...) draw from non-overlapping streams
/// and adding a new stream never perturbs the existing ones.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(mix(mix(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 1))) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Box-Muller; the second variate of each pair is cached.
  double normal(double mean = 0.0, double stddev = 1.0) {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return mean + stddev * z;
    }
    // 1 - uniform01() lies in (0, 1], keeping the log finite.
    const double r = std::sqrt(-2.0 * std::log(1.0 - uniform01()));
    const double t = 2.0 * std::numbers::pi * uniform01();
    spare_ = r * std::sin(t);
    return mean + stddev * r * std::cos(t);
  }

  /// Uniform integer in [0, n) by rejection, n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// First `count` entries of a Fisher-Yates shuffle of 0..n-1, i.e. a
  /// uniformly random subset of size `count` in random order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count && i + 1 < n; ++i) {
      const auto j = i + static_cast<std::size_t>(below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace pha
