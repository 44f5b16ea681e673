#include <doctest.h>

#include <cmath>

#include "geocume/correlation.hpp"
#include "geocume/error.hpp"

using namespace geocume;

namespace {

std::vector<PointConfig> poisson_set(std::size_t reps, double n, double intensity) {
  std::vector<PointConfig> cs;
  for (std::size_t i = 0; i < reps; ++i) cs.push_back(sample_poisson(Window(2, n), intensity, RngSeed{1000 + i}));
  return cs;
}

}  // namespace

TEST_SUITE("correlation") {
  TEST_CASE("Poisson intensity and pair correlation") {
    const auto cs = poisson_set(100, 100.0, 2.0);
    const CorrelationEstimate e = estimate_correlation(cs, 2, {0.1, 0.5, 1.0, 2.0, 3.0});
    CHECK(e.replicates == 100);
    CHECK(std::abs(e.rho1 - 2.0) <= 4.0 * e.rho1_se);
    REQUIRE(e.bins.size() == 4);
    for (const auto& b : e.bins) {
      CHECK(std::abs(b.g - 1.0) <= 4.0 * b.g_se);
      CHECK(std::abs(b.rho2 - 4.0) <= 4.0 * b.rho2_se);
      CHECK(b.pairs > 0);
    }
  }

  TEST_CASE("first order only") {
    const auto cs = poisson_set(40, 50.0, 1.0);
    const CorrelationEstimate e = estimate_correlation(cs, 1);
    CHECK(e.bins.empty());
    CHECK(e.rho1 > 0.0);
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(estimate_correlation(poisson_set(10, 50.0, 1.0), 1), Error);
    const auto cs = poisson_set(30, 16.0, 1.0);
    CHECK_THROWS_AS(estimate_correlation(cs, 3, {0.0, 1.0}), Error);
    CHECK_THROWS_AS(estimate_correlation(cs, 2, {1.0}), Error);
    CHECK_THROWS_AS(estimate_correlation(cs, 2, {1.0, 0.5}), Error);
    CHECK_THROWS_AS(estimate_correlation(cs, 2, {0.0, 2.5}), Error);
    auto mixed = cs;
    mixed.back() = sample_poisson(Window(2, 20.0), 1.0, RngSeed{1});
    CHECK_THROWS_AS(estimate_correlation(mixed, 1), Error);
  }
}
