#include <doctest.h>

#include <cmath>

#include "geocume/error.hpp"
#include "geocume/pointproc.hpp"

using namespace geocume;

TEST_SUITE("pointproc") {
  TEST_CASE("window geometry") {
    const Window w(2, 16.0);
    CHECK(w.side() == doctest::Approx(4.0));
    CHECK(w.half_side() == doctest::Approx(2.0));
    const std::vector<double> in = {1.9, -2.0}, out = {2.1, 0.0};
    CHECK(w.contains(in));
    CHECK_FALSE(w.contains(out));
    CHECK(Window(3, 27.0).side() == doctest::Approx(3.0));
    CHECK_THROWS_AS(Window(4, 1.0), Error);
    CHECK_THROWS_AS(Window(2, 0.0), Error);
  }

  TEST_CASE("configuration validation") {
    PointConfig c(Window(2, 4.0));
    const std::vector<double> a = {0.5, 0.5}, outside = {1.5, 0.0};
    c.add(a);
    CHECK_THROWS_AS(c.add(outside), Error);
    CHECK_THROWS_AS(c.add(std::vector<double>{0.1}), Error);
    c.validate();
    c.add(a);
    CHECK_THROWS_AS(c.validate(), Error);
    PointConfig m(Window(1, 2.0));
    m.add(std::vector<double>{0.0});
    CHECK_THROWS_AS(m.set_marks({1.5}), Error);
    CHECK_THROWS_AS(m.set_marks({0.1, 0.2}), Error);
    CHECK_THROWS_AS(m.marks(), Error);
  }

  TEST_CASE("Poisson sampler: determinism, window and count moments") {
    const Window w(2, 50.0);
    CHECK(sample_poisson(w, 2.0, RngSeed{9}) == sample_poisson(w, 2.0, RngSeed{9}));
    CHECK_FALSE(sample_poisson(w, 2.0, RngSeed{9}) == sample_poisson(w, 2.0, RngSeed{10}));
    constexpr int reps = 2000;
    double s = 0.0, ss = 0.0, xs = 0.0;
    std::size_t total = 0;
    for (int i = 0; i < reps; ++i) {
      const PointConfig c = sample_poisson(w, 2.0, RngSeed{static_cast<std::uint64_t>(i)});
      c.validate();
      const auto n = static_cast<double>(c.size());
      s += n;
      ss += n * n;
      for (std::size_t j = 0; j < c.size(); ++j) xs += c.point(j)[0];
      total += c.size();
    }
    const double mean = s / reps, var = ss / reps - mean * mean;
    CHECK(std::abs(mean - 100.0) < 5.0 * std::sqrt(100.0 / reps));
    CHECK(std::abs(var / 100.0 - 1.0) < 0.15);
    // first coordinate is uniform on [-h, h]
    CHECK(std::abs(xs / static_cast<double>(total)) < 5.0 * w.half_side() / std::sqrt(3.0 * static_cast<double>(total)));
    CHECK_THROWS_AS(sample_poisson(w, 0.0, RngSeed{1}), Error);
    CHECK_THROWS_AS(sample_poisson(Window(2, 1e8), 1.0, RngSeed{1}), Error);
  }

  TEST_CASE("marks") {
    const PointConfig c = attach_marks(sample_poisson(Window(2, 20.0), 1.0, RngSeed{3}), RngSeed{4});
    REQUIRE(c.has_marks());
    CHECK(c.marks().size() == c.size());
    for (double m : c.marks()) CHECK((m >= 0.0 && m <= 1.0));
    CHECK_THROWS_AS(attach_marks(c, RngSeed{5}), Error);
  }

  TEST_CASE("JSON round trip is exact") {
    PointConfig c = attach_marks(sample_poisson(Window(3, 8.0), 3.0, RngSeed{6}), RngSeed{7});
    c.seed = 123456789012345ULL;
    c.spec_digest = "abc";
    const std::string text = to_json_string(c);
    const PointConfig back = point_config_from_json_string(text);
    CHECK(back == c);
    CHECK(to_json_string(back) == text);
    CHECK_THROWS_AS(point_config_from_json_string("{\"d\":2}"), Error);
    CHECK(to_points(c).size() == c.size());
  }
}
