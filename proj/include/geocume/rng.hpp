#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace geocume {

/// Root of a deterministic random stream.
struct RngSeed {
  std::uint64_t value = 0;

  friend bool operator==(RngSeed, RngSeed) = default;
};

/// Mixes `keys` into `root` with splitmix64 finalization.
///
/// Streams for replicate `i`, component `j` of window size `n` are obtained as
/// `derive_seed(root, {n, i, j})`. The mixing function is fixed so that seeds,
/// and therefore samples, are stable across releases and platforms.
RngSeed derive_seed(RngSeed root, std::initializer_list<std::uint64_t> keys);

/// Random source with hand-written variate generators.
///
/// The standard library fixes the output of std::mt19937_64 but not that of
/// its distributions, so every variate used by the samplers is generated here.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(seed.value) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t index(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  /// Exp(1).
  double exponential();

  /// Standard normal (Marsaglia polar method, no cached pair).
  double normal();

  /// Gamma(shape, 1) for shape > 0 (Marsaglia-Tsang).
  double gamma(double shape);

  /// Poisson(mean) by counting unit-rate arrivals; O(mean) work.
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
};

}  // namespace geocume
