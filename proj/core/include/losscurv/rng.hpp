#ifndef LOSSCURV_RNG_HPP_
#define LOSSCURV_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace losscurv {

// SplitMix64 (Steele, Lea & Flood 2014): a counter-based 64-bit generator.
// The state advances by a fixed Weyl increment, so stream position k is
// reachable directly and the output is a pure mix of (seed + k). Every
// stochastic routine in the library derives one stream per work item as
// SplitMix64(seed + item_index); results are therefore independent of
// thread count and evaluation order.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; never zero, safe under log().
  double uniform_open01() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second deviate of each pair is
  // cached so consecutive calls consume uniforms at a fixed rate.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_open01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Rademacher +/-1 from the top bit.
  double rademacher() { return (next() >> 63) ? 1.0 : -1.0; }

  // Uniform integer in [0, n) without modulo bias (Lemire reduction).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

// Per-item stream: item `index` under master seed `seed`.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(seed + index);
}

// Uniform direction on the Euclidean unit sphere S^{q-1}.
inline std::vector<double> sample_unit_sphere(SplitMix64& rng, int q) {
  std::vector<double> d(static_cast<std::size_t>(q));
  double norm_sq = 0.0;
  do {
    norm_sq = 0.0;
    for (auto& di : d) {
      di = rng.normal();
      norm_sq += di * di;
    }
  } while (norm_sq < 1e-300);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (auto& di : d) di *= inv;
  return d;
}

}  // namespace losscurv

#endif  // LOSSCURV_RNG_HPP_
