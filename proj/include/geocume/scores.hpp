#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geocume/pointproc.hpp"
#include "geocume/rng.hpp"

namespace geocume {

enum class ScoreKind {
  k_coverage,  // share of the k-covered region of B_r(x)
  rsa,         // 1 if x is accepted by random sequential adsorption with radius r
  count,       // 1 for every point
};

std::string to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

/// Score function with its declared stabilization and growth parameters.
struct ScoreModel {
  ScoreKind kind = ScoreKind::count;
  int k = 1;
  double r = 0.5;
  double b = 0.0;
  double beta = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;

  static ScoreModel k_coverage(int k, double r);
  static ScoreModel rsa(double r, double b = 0.0);
  static ScoreModel count();

  void validate() const;
  bool requires_marks() const { return kind == ScoreKind::rsa; }
  /// sup of |xi|: theta_d r^d for coverage, 1 otherwise.
  double score_bound(int d) const;
};

struct QuadratureParams {
  int cells_per_r = 64;
};

/// Reported quadrature tolerance of one coverage score: cell diameter times sphere area.
double coverage_tolerance(int d, double r, const QuadratureParams& quad);

/// xi^(k)(x, X) = integral over B_r(x) of 1{X(B_r(y)) >= k} / X(B_r(y)) dy.
///
/// Midpoint rule on the cells of the bounding cube of B_r(x) whose centers lie in the
/// ball, each weighted by theta_d r^d / (number of such cells).
double score_k_coverage(std::span<const double> x, const PointConfig& config, int k, double r,
                        const QuadratureParams& quad = {});

/// Coverage scores of every point of the configuration.
std::vector<double> coverage_scores(const PointConfig& config, int k, double r, const QuadratureParams& quad = {});

/// RSA acceptance per point: points are visited in increasing mark order and accepted iff
/// they are at distance >= 2r from every previously accepted point.
std::vector<std::uint8_t> score_rsa(const PointConfig& config, double r);

/// Deterministic stabilization radius bound: 2r for coverage, 0 for count, none for RSA.
std::optional<double> stabilization_radius_bound(const ScoreModel& model);

struct StabilizationProbe {
  std::vector<double> radii;
  std::vector<std::uint8_t> stable;
  /// Smallest tested radius from which every larger tested radius is stable.
  std::optional<double> radius;
};

/// Empirical stabilization radius of the RSA score of point `index`.
///
/// For each s on the grid r/4, r/2, ..., max_radius the configuration is restricted to
/// B_s(x) and perturbed outside B_s(x) by `trials` random marked point sets (including
/// points just outside the sphere with mark 0); s is stable when the acceptance of x
/// never changes.
StabilizationProbe rsa_stabilization_probe(const PointConfig& config, std::size_t index, double r, double max_radius,
                                           RngSeed seed, int trials = 32);

enum class TestFunctionKind { constant, box, bump };

/// Bounded test function on rescaled coordinates x n^{-1/d}, with W_1 = [-1/2, 1/2]^d.
struct TestFunction {
  TestFunctionKind kind = TestFunctionKind::constant;
  double height = 1.0;
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<double> center;
  double width = 0.5;

  static TestFunction constant(double c = 1.0);
  /// height * 1{lo <= x <= hi} componentwise.
  static TestFunction box(std::vector<double> lo, std::vector<double> hi, double height = 1.0);
  /// height * exp(1 - 1 / (1 - |x - center|^2 / width^2)) inside the ball, 0 outside.
  static TestFunction bump(std::vector<double> center, double width, double height = 1.0);

  double operator()(std::span<const double> u) const;
  double sup_norm() const { return std::abs(height); }
  /// integral of f^2 over W_1 for constant and box; midpoint estimate for bump.
  double square_integral(int d) const;
};

/// xi(x, X) for every point x of the configuration.
std::vector<double> point_scores(const PointConfig& config, const ScoreModel& model, const QuadratureParams& quad = {});

/// mu_n^xi(f) = sum over x in the configuration of xi(x) f(x n^{-1/d}).
double evaluate_statistic(const PointConfig& config, const ScoreModel& model, const TestFunction& f,
                          const QuadratureParams& quad = {});

}  // namespace geocume
