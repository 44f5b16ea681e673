#pragma once

#include <cstdint>
#include <vector>

#include "geocume/rng.hpp"

namespace geocume {

/// Points x_1..x_{p-1} in R^d; the origin is the implicit point x_0.
struct SigConfig {
  int d = 1;
  std::vector<double> x;  // flat, (p-1) * d values

  int p() const { return 1 + static_cast<int>(x.size()) / d; }
};

inline constexpr int kMaxSigEnumeration = 16;

/// max over I subset of {1..p-1} with nonempty complement of dist((0, x_I), x_{I^c}).
///
/// Subset enumeration for p - 1 <= 16, otherwise bisection over the pairwise distances
/// with sig_connected. Equals the smallest r for which SIG_r(0, x) is connected.
double sig_norm(const SigConfig& cfg);

/// Whether the graph on {0, .., p-1} with edges between points at distance <= r is connected.
bool sig_connected(const SigConfig& cfg, double r);

struct SigVolumeEstimate {
  double estimate;
  double stderr_;
  double tree_bound;   // theta_d^{p-1} p^{p-2}
  double lemma_bound;  // (e theta_d)^{p-1} p!
};

/// Monte Carlo volume of {x in (R^d)^{p-1} : ||x||_sig <= 1} over the box [-(p-1), p-1]^{d(p-1)}.
SigVolumeEstimate sig_volume_mc(int d, int p, std::uint64_t samples, RngSeed seed);

enum class HomogeneousNorm { euclidean, max_norm, sig };
enum class RadialProfile { exp, gauss, indicator_poly };

struct CoareaCase {
  int d = 2;
  HomogeneousNorm norm = HomogeneousNorm::euclidean;
  RadialProfile profile = RadialProfile::exp;
  /// sig norm: number of points p, so the integration dimension is d (p - 1).
  int p = 2;
  /// indicator_poly: f(s) = 1{s <= 1} sum_j coeffs[j] s^j.
  std::vector<double> coeffs = {1.0};
};

struct CoareaAudit {
  double lhs;  // integral of f(u(x)) over R^D by product Gauss-Legendre quadrature
  double rhs;  // D Vol(u <= 1) integral of s^{D-1} f(s)
  double tolerance;
  bool ok;
};

/// Checks integral f(u(x)) dx = D Vol_D(u <= 1) integral_0^inf s^{D-1} f(s) ds, D <= 2.
CoareaAudit coarea_identity_check(const CoareaCase& c);

struct DecayMode {
  enum class Kind { power, exp } kind = Kind::power;
  double l = 3.0;
  double c = 1.0;
  double a_hat = 1.0;
};

struct DecayIntegralAudit {
  double value;   // integral of g(max(||x||_sig, 1)) over (R^d)^{p-1}
  double stderr_;
  double bound;   // same reduction with Vol(||.||_sig <= 1) replaced by (e theta_d)^{p-1} p!
  bool ok;
};

/// Integral of the sig-norm decay profile, reduced by homogeneity to
/// D Vol(||.||_sig <= 1) integral_0^inf s^{D-1} g(max(s, 1)) ds with D = d(p-1); the volume is
/// estimated by Monte Carlo and the radial integral is exact. D <= 6; power mode needs l > D + 1.
DecayIntegralAudit integral_decay_bounds_check(int d, int p, const DecayMode& mode, std::uint64_t samples,
                                               RngSeed seed);

}  // namespace geocume
