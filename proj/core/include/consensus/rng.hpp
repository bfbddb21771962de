#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace consensus {

/// Counter-based random stream keyed by (master_seed, stream_index).
///
/// Output i is a bijective 64-bit mix of `key + (i+1) * golden`, so any stream
/// can be positioned without generating its predecessors and distinct run
/// indices give independent streams. All derived draws (uniform integers,
/// unit reals, exponentials) are computed here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t master_seed, std::uint64_t stream = 0)
      : key_(mix(mix(master_seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix(key_ + counter_ * kGolden);
  }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Exponential variate with the given rate (> 0).
  double exponential(double rate) { return -std::log1p(-unit()) / rate; }

  bool coin() { return ((*this)() >> 63) != 0; }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace consensus
