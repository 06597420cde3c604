#pragma once

#include <cmath>
#include <cstdint>
#include <span>

namespace qinfer {

// 64-bit avalanche (the splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ULL;

// Stream-splitting function. Every consumer of randomness in this project
// derives its own seed as substream(parent_seed, a, b), so two code paths
// that agree on the (a, b) labels draw identical values no matter in which
// order they run. Labels in use:
//   chains:          substream(base_seed, kChainStream, replication)
//   entry updates:   substream(chain_seed, iteration t, s * num_actions + a)
//   stationary sims: substream(base_seed, kStationaryStream + index, sim)
constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b) {
  const std::uint64_t h = mix64(seed ^ (kGolden64 * (a + 1)));
  return mix64(h ^ (kGolden64 * (b + 1)));
}

constexpr std::uint64_t kChainStream = 0x51C4A1ULL;
constexpr std::uint64_t kStationaryStream = 0x57A7ULL;
constexpr std::uint64_t kMethodStream = 0x3E7D0DULL;

// splitmix64: counter-based, passes BigCrush, two instructions of state.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~std::uint64_t{0}; }

  constexpr result_type operator()() {
    state_ += kGolden64;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// One stream of randomness with the distributions the samplers need.
// Gaussians use the Marsaglia polar method with the usual pair cache, so a
// stream's draw sequence is fully determined by its seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Index into a discrete distribution given its cumulative weights
  // (cdf.back() == 1 within rounding).
  int categorical(std::span<const double> cdf) {
    const double u = uniform01();
    int i = 0;
    const int last = static_cast<int>(cdf.size()) - 1;
    while (i < last && u >= cdf[i]) ++i;
    return i;
  }

 private:
  SplitMix64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qinfer
