#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geocume/dpp.hpp"
#include "geocume/error.hpp"
#include "geocume/geometry.hpp"

using namespace geocume;

namespace {

std::pair<double, double> count_moments(const std::vector<PointConfig>& cs) {
  double s = 0.0, ss = 0.0;
  for (const auto& c : cs) {
    const auto n = static_cast<double>(c.size());
    s += n;
    ss += n * n;
  }
  const auto m = static_cast<double>(cs.size());
  const double mean = s / m;
  return {mean, (ss - m * mean * mean) / (m - 1.0)};
}

}  // namespace

TEST_SUITE("dpp") {
  TEST_CASE("Ginibre matrix model: intensity, rigidity and determinism") {
    const Window w(2, 64.0);
    std::vector<PointConfig> cs;
    for (std::uint64_t i = 0; i < 200; ++i) cs.push_back(sample_dpp(w, KernelSpec::ginibre(), RngSeed{i}));
    for (const auto& c : cs) c.validate();
    const auto [mean, var] = count_moments(cs);
    const double expected = 64.0 / std::numbers::pi;
    CHECK(std::abs(mean - expected) < 4.0 * std::sqrt(var / 200.0));
    // number variance of the Ginibre process grows like the perimeter, far below Poisson
    CHECK(var < 0.6 * expected);
    CHECK(sample_dpp(w, KernelSpec::ginibre(), RngSeed{3}) == cs[3]);
    CHECK(ginibre_matrix_size(w) > expected);
  }

  TEST_CASE("thinned Ginibre keeps the amplitude as intensity factor") {
    const Window w(2, 36.0);
    double total = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) total += static_cast<double>(sample_dpp(w, KernelSpec::ginibre(0.5), RngSeed{i}).size());
    CHECK(total / 200.0 == doctest::Approx(0.5 * 36.0 / std::numbers::pi).epsilon(0.06));
    CHECK_THROWS_AS(sample_dpp(w, KernelSpec::ginibre(1.5), RngSeed{1}), Error);
  }

  TEST_CASE("grid spectral method for a Gaussian kernel") {
    const Window w(2, 9.0);
    const KernelSpec k = KernelSpec::gaussian(2, 0.3, 1.0);
    DppParams params;
    params.method = DppMethod::grid;
    params.cells_per_unit = 8.0;
    std::vector<PointConfig> cs;
    for (std::uint64_t i = 0; i < 60; ++i) cs.push_back(sample_dpp(w, k, RngSeed{i}, params));
    const auto [mean, var] = count_moments(cs);
    CHECK(std::abs(mean - 0.3 * 9.0) < 4.0 * std::sqrt(var / 60.0) + 0.05);
    CHECK(var < mean);
    params.max_cells = 100;
    CHECK_THROWS_AS(sample_dpp(w, k, RngSeed{1}, params), Error);
    CHECK_THROWS_AS(sample_dpp(w, KernelSpec::gaussian(2, 0.9, 1.0), RngSeed{1}, DppParams{DppMethod::grid, 8.0, 4096}),
                    Error);
  }

  TEST_CASE("alpha-DPP superposition") {
    const Window w(2, 25.0);
    const KernelSpec k = KernelSpec::ginibre();
    CHECK(sample_alpha_dpp(w, k, 1, RngSeed{4}) == sample_dpp(w, k, RngSeed{4}));
    double total = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) total += static_cast<double>(sample_alpha_dpp(w, k, 2, RngSeed{i}).size());
    CHECK(total / 200.0 == doctest::Approx(25.0 / std::numbers::pi).epsilon(0.05));
    CHECK_THROWS_AS(sample_alpha_dpp(w, k, 0, RngSeed{1}), Error);
  }

  TEST_CASE("dimension checks") {
    CHECK_THROWS_AS(sample_dpp(Window(1, 10.0), KernelSpec::ginibre(), RngSeed{1}), Error);
    CHECK_THROWS_AS(ginibre_matrix_size(Window(3, 8.0)), Error);
  }
}
