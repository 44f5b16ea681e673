#include "geocume/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace geocume {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngSeed derive_seed(RngSeed root, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t state = mix(root.value);
  for (std::uint64_t key : keys) {
    state = mix(state ^ mix(key + 0x632be59bd9b4e019ULL));
  }
  return RngSeed{state};
}

std::uint64_t Rng::index(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("Rng::index: empty range");
  }
  // Rejection of the biased tail keeps the draw exactly uniform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v = engine_();
  while (v >= limit) {
    v = engine_();
  }
  return v % bound;
}

double Rng::exponential() { return -std::log1p(-uniform()); }

double Rng::normal() {
  while (true) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("Rng::gamma: shape must be positive");
  }
  if (shape < 1.0) {
    // Boost to shape + 1 and scale back by U^{1/shape}.
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("Rng::poisson: mean must be finite and non-negative");
  }
  std::uint64_t count = 0;
  double t = exponential();
  while (t < mean) {
    ++count;
    t += exponential();
  }
  return count;
}

}  // namespace geocume
