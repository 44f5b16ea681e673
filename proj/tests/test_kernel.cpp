#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geocume/error.hpp"
#include "geocume/kernel.hpp"
#include "geocume/rng.hpp"

using namespace geocume;

TEST_SUITE("kernel") {
  TEST_CASE("Ginibre kernel values") {
    const KernelSpec k = KernelSpec::ginibre();
    const std::vector<double> z = {1.0, 0.0}, w = {0.0, 1.0};
    // exp(conj(w) z - |z|^2/2 - |w|^2/2) = exp(-i - 1)
    const Complex want = std::exp(Complex(-1.0, -1.0));
    CHECK(std::abs(k(z, w) - want) < 1e-15);
    CHECK(std::abs(k(w, z) - std::conj(want)) < 1e-15);
    CHECK(k.intensity() == doctest::Approx(1.0 / std::numbers::pi));
    CHECK(k.measure_density() == doctest::Approx(1.0 / std::numbers::pi));
    CHECK(k.dimension() == 2);
    CHECK(k.envelope().a_hat == 2.0);
    CHECK(k.envelope().c == 0.5);
  }

  TEST_CASE("kernels stay below their decay envelope") {
    Rng rng(RngSeed{1});
    const KernelSpec kernels[] = {KernelSpec::ginibre(0.7), KernelSpec::gaussian(2, 0.3, 1.5),
                                  KernelSpec::tabulated(2, {0.0, 1.0, 2.0}, {0.4, 0.0, 0.0}, {0.4, 1.0, 1.0})};
    for (const auto& k : kernels) {
      for (int t = 0; t < 200; ++t) {
        const std::vector<double> x = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const std::vector<double> y = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const double r = std::hypot(x[0] - y[0], x[1] - y[1]);
        CHECK(std::abs(k(x, y)) <= k.envelope()(r) * (1.0 + 1e-12) + 1e-300);
        CHECK(std::abs(k(x, y)) <= k.sup_norm() * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("Gaussian and tabulated kernels") {
    const KernelSpec g = KernelSpec::gaussian(1, 0.5, 2.0);
    const std::vector<double> a = {0.0}, b = {2.0};
    CHECK(g(a, b).real() == doctest::Approx(0.5 * std::exp(-1.0)));
    CHECK(g.intensity() == 0.5);
    const KernelSpec t = KernelSpec::tabulated(1, {0.0, 1.0, 2.0}, {0.4, 0.2, 0.0}, {0.4, 0.1, 1.0});
    const std::vector<double> h = {0.5}, far = {5.0};
    CHECK(t(a, h).real() == doctest::Approx(0.3));
    CHECK(t(a, far).real() == 0.0);
    CHECK(t.intensity() == doctest::Approx(0.4));
  }

  TEST_CASE("invalid kernels") {
    CHECK_THROWS_AS(KernelSpec::ginibre(-1.0), Error);
    CHECK_THROWS_AS(KernelSpec::gaussian(4, 0.1, 1.0), Error);
    CHECK_THROWS_AS(KernelSpec::gaussian(2, 0.1, 0.0), Error);
    CHECK_THROWS_AS(KernelSpec::tabulated(2, {0.0, 1.0}, {1.0, 0.9}, {1.0, 1.0, 1.0}), Error);
    CHECK_THROWS_AS(KernelSpec::tabulated(2, {0.5, 1.0}, {0.1, 0.0}, {1.0, 1.0, 1.0}), Error);
    CHECK_THROWS_AS(kernel_kind_from_string("bessel"), Error);
  }

  TEST_CASE("scaling multiplies the kernel and its envelope") {
    const KernelSpec k = KernelSpec::ginibre().scaled(0.5);
    CHECK(k.amplitude() == 0.5);
    CHECK(k.envelope().C == 0.5);
    CHECK(k.intensity() == doctest::Approx(0.5 / std::numbers::pi));
    CHECK_THROWS_AS(KernelSpec::ginibre().scaled(-1.0), Error);
  }

  TEST_CASE("infinite decay exponent is a unit-range indicator") {
    const DecayEnvelope e{2.0, 1.0, INFINITY};
    CHECK(e(0.5) == 2.0);
    CHECK(e(1.5) == 0.0);
  }
}
