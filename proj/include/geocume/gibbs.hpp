#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geocume/pointproc.hpp"

namespace geocume {

enum class GibbsClass { pair_potential, hard_core, area_interaction, truncated_poisson };

std::string to_string(GibbsClass kind);
GibbsClass gibbs_class_from_string(const std::string& name);

/// Gibbs process with density exp(-beta H) relative to Poisson(lambda).
///
/// pair_potential:    H = sum over ordered pairs x != y of phi(|x - y|), phi = +inf on (0, s0) and
///                    phi(s) = c1 exp(-c2 s) on [s0, inf), or the linear interpolation of
///                    phi_table (zero beyond its last node) when a table is given.
/// hard_core:         H = +inf if two points are closer than 2 s0, else c1 |X| + c2.
/// area_interaction:  H = Vol(union of B_radius(x)) + c1 |X| + c2.
/// truncated_poisson: H = 0 if no two points are closer than min_distance, else +inf.
struct GibbsSpec {
  GibbsClass kind = GibbsClass::hard_core;
  double lambda = 1.0;
  double beta = 1.0;
  double s0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<double> phi_radii;
  std::vector<double> phi_values;
  double radius = 0.0;
  double min_distance = 0.0;

  /// Throws a config error when parameters are outside their domain.
  void validate() const;

  /// phi(s) for the pair potential class; +inf inside the hard core.
  double phi(double s) const;

  /// Range beyond which points do not interact.
  double interaction_range() const;
};

struct McmcParams {
  /// Proposals discarded before the first counted sweep; 0 selects 10 * ceil(lambda n).
  std::uint64_t burn_in = 0;
  /// Sweeps after burn-in; one sweep is ceil(lambda n) proposals.
  std::uint64_t sweeps = 40;
  /// Grid cells per grain radius for the uncovered-volume integral (area interaction).
  int area_cells_per_radius = 16;
};

struct GibbsResult {
  PointConfig config;
  double acceptance_rate = 0.0;
  std::uint64_t proposals = 0;
  std::vector<std::string> warnings;
};

/// Birth-death-move Metropolis-Hastings chain targeting the Gibbs density.
///
/// Each proposal is a birth, death or move with probability 1/3. Hard constraints
/// (hard core, truncation, infinite pair potential) are enforced for every beta,
/// including beta = 0. An acceptance rate outside [0.05, 0.95] after burn-in is
/// reported as a warning.
GibbsResult sample_gibbs(const Window& window, const GibbsSpec& spec, const McmcParams& mcmc, RngSeed seed);

}  // namespace geocume
