#pragma once

#include <cstdint>
#include <vector>

#include "geocume/pointproc.hpp"

namespace geocume {

struct CorrelationBin {
  double r_lo = 0.0;
  double r_hi = 0.0;
  double rho2 = 0.0;
  double rho2_se = 0.0;
  /// Pair correlation rho2 / rho1^2 with a jackknife standard error over replicates.
  double g = 0.0;
  double g_se = 0.0;
  std::uint64_t pairs = 0;
};

struct CorrelationEstimate {
  double rho1 = 0.0;
  double rho1_se = 0.0;
  std::vector<CorrelationBin> bins;
  std::size_t replicates = 0;
};

inline constexpr std::size_t kMinCorrelationReplicates = 30;

/// Campbell-Mecke estimators from replicated configurations.
///
/// rho1 is count / volume. For p = 2, rho2 on [edges[b], edges[b+1]) counts ordered
/// pairs (x, y) with x in the window eroded by the largest edge (minus sampling),
/// divided by the eroded volume times the shell volume. `edges` must be strictly
/// increasing, start at >= 0 and stay below half the window side.
CorrelationEstimate estimate_correlation(const std::vector<PointConfig>& configs, int p,
                                         const std::vector<double>& edges = {});

}  // namespace geocume
