#include "geocume/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "geocume/error.hpp"
#include "geocume/geometry.hpp"

namespace geocume {

namespace {

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace

CorrelationEstimate estimate_correlation(const std::vector<PointConfig>& configs, int p,
                                         const std::vector<double>& edges) {
  if (configs.empty()) {
    throw Error(ErrorKind::argument, "estimate_correlation: empty replicate set");
  }
  if (configs.size() < kMinCorrelationReplicates) {
    throw Error(ErrorKind::sample_size, "estimate_correlation needs at least 30 replicates, got " +
                                            std::to_string(configs.size()));
  }
  if (p != 1 && p != 2) {
    throw Error(ErrorKind::argument, "estimate_correlation: p must be 1 or 2");
  }
  const Window window = configs.front().window();
  for (const auto& c : configs) {
    if (!(c.window() == window)) {
      throw Error(ErrorKind::argument, "estimate_correlation: replicates use different windows");
    }
  }
  const std::size_t reps = configs.size();
  std::vector<double> rho1(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    rho1[i] = static_cast<double>(configs[i].size()) / window.volume();
  }
  CorrelationEstimate est;
  est.replicates = reps;
  const MeanSe r1 = mean_se(rho1);
  est.rho1 = r1.mean;
  est.rho1_se = r1.se;
  if (p == 1) {
    return est;
  }

  if (edges.size() < 2) {
    throw Error(ErrorKind::argument, "estimate_correlation: need at least two bin edges");
  }
  for (std::size_t b = 0; b < edges.size(); ++b) {
    if (!(edges[b] >= 0.0) || (b > 0 && !(edges[b] > edges[b - 1]))) {
      throw Error(ErrorKind::argument, "estimate_correlation: bin edges must be increasing and non-negative");
    }
  }
  const double r_max = edges.back();
  const double inner_half = window.half_side() - r_max;
  if (!(inner_half > 0.0)) {
    throw Error(ErrorKind::argument, "estimate_correlation: largest distance leaves no interior for minus sampling");
  }
  const int d = window.d;
  const double eroded = std::pow(2.0 * inner_half, d);
  const double vd = unit_ball_volume(d);
  const std::size_t nb = edges.size() - 1;
  std::vector<double> shell(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    shell[b] = vd * (std::pow(edges[b + 1], d) - std::pow(edges[b], d));
  }

  // counts[i][b]: ordered pairs of replicate i in bin b.
  std::vector<std::vector<double>> counts(reps, std::vector<double>(nb, 0.0));
  std::vector<std::uint64_t> totals(nb, 0);
  for (std::size_t i = 0; i < reps; ++i) {
    const PointConfig& c = configs[i];
    if (c.size() < 2) {
      continue;
    }
    const NeighborGrid grid(d, c.coords(), r_max);
    for (std::size_t a = 0; a < c.size(); ++a) {
      const auto x = c.point(a);
      bool interior = true;
      for (int k = 0; k < d; ++k) {
        if (std::abs(x[static_cast<std::size_t>(k)]) > inner_half) {
          interior = false;
        }
      }
      if (!interior) {
        continue;
      }
      grid.for_each_within(x, r_max, [&](std::size_t j) {
        if (j == a) {
          return;
        }
        const double r = std::sqrt(distance2(x, c.point(j)));
        if (r < edges.front() || r >= r_max) {
          return;
        }
        const auto it = std::upper_bound(edges.begin(), edges.end(), r);
        const auto b = static_cast<std::size_t>(it - edges.begin()) - 1;
        counts[i][b] += 1.0;
        ++totals[b];
      });
    }
  }

  const auto n = static_cast<double>(reps);
  double rho1_sum = 0.0;
  for (double v : rho1) rho1_sum += v;
  for (std::size_t b = 0; b < nb; ++b) {
    CorrelationBin bin;
    bin.r_lo = edges[b];
    bin.r_hi = edges[b + 1];
    bin.pairs = totals[b];
    std::vector<double> rho2(reps);
    for (std::size_t i = 0; i < reps; ++i) {
      rho2[i] = counts[i][b] / (eroded * shell[b]);
    }
    const MeanSe r2 = mean_se(rho2);
    bin.rho2 = r2.mean;
    bin.rho2_se = r2.se;
    double rho2_sum = 0.0;
    for (double v : rho2) rho2_sum += v;
    const double full = rho1_sum > 0.0 ? (rho2_sum / n) / std::pow(rho1_sum / n, 2) : 0.0;
    bin.g = full;
    // Leave-one-out jackknife of the ratio estimator.
    std::vector<double> loo(reps);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      const double m1 = (rho1_sum - rho1[i]) / (n - 1.0);
      const double m2 = (rho2_sum - rho2[i]) / (n - 1.0);
      loo[i] = m1 > 0.0 ? m2 / (m1 * m1) : 0.0;
      loo_mean += loo[i];
    }
    loo_mean /= n;
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    bin.g_se = std::sqrt((n - 1.0) / n * ss);
    est.bins.push_back(bin);
  }
  return est;
}

}  // namespace geocume
