#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "geocume/pointproc.hpp"

namespace geocume {

/// Replicate values of one statistic at a fixed window volume n.
struct SampleSet {
  std::vector<double> values;
  double n = 0.0;
  std::vector<std::uint64_t> seeds;
};

/// kappa[k-1] and stderr_[k-1] for k = 1..kmax.
struct CumulantReport {
  double n = 0.0;
  std::vector<double> kappa;
  std::vector<double> stderr_;

  int kmax() const { return static_cast<int>(kappa.size()); }
};

inline constexpr int kMaxCumulantOrder = 6;

/// Unbiased k-statistics for k <= 4, plug-in central-moment cumulants for k = 5, 6.
/// Standard errors are leave-one-out jackknife. Needs at least 10 kmax values.
CumulantReport sample_cumulants(const SampleSet& samples, int kmax);

/// Thresholds of the empirical checks.
struct Tolerances {
  double n_stderr = 3.0;
  double stabilization_rel = 0.10;
  double growth_factor = 3.0;
  double ks_noise_factor = 2.0;
};

inline constexpr double kInfiniteDecay = std::numeric_limits<double>::infinity();

struct GammaParams {
  double a = 0.0;
  /// Use kInfiniteDecay for processes with finite-range correlations.
  double a_hat = kInfiniteDecay;
  double b = 0.0;
  double beta = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int d = 2;
};

struct GammaResult {
  double gamma;
  double exponent;       // 1 / (2 + 4 gamma)
  int branch;            // 1 if (1-a) a_hat / d <= 1, else 2
  double first_branch;   // 1 + max(gamma2, beta) + d/((1-a) a_hat) + b d^2/((1-a) a_hat)
  double second_branch;  // 1 + max(gamma2, beta) + d/a_hat + a + b d
};

GammaResult gamma_exponent(const GammaParams& params);

/// Whether a_n = n^q is an admissible moderate deviation scale: q > 0 and q < exponent.
bool mdp_scale_admissible(double q, const GammaResult& gamma);

/// (x - mean) / sd with the unbiased sample deviation.
std::vector<double> standardize(const std::vector<double>& values);

/// sup_s |F_n(s) - Phi(s)| of the empirical distribution of `values`.
double ks_distance_normal(std::vector<double> values);

struct KsRow {
  double n;
  double ks;
  double noise_floor;  // 1 / sqrt(replicates)
  bool pass;
};

struct CltReport {
  std::vector<KsRow> rows;
  bool improved;  // last KS < first KS
  bool pass;      // every row within ks_noise_factor floors of its predecessor
};

/// Sample sets must be ordered by strictly increasing n, at least two, 200 replicates each.
CltReport clt_check(const std::vector<SampleSet>& by_n, const Tolerances& tol = {});

struct VarianceRow {
  double n;
  double var_per_n;
  double var_se;
  double mean_per_n;
  double mean_se;
};

struct VarianceReport {
  std::vector<VarianceRow> rows;
  double last_gap;
  double allowed;
  bool pass;
};

/// At least three n values. Passes if the last two Var/n agree within
/// stabilization_rel |Var/n| + n_stderr combined standard errors.
VarianceReport variance_asymptotic_check(const std::vector<SampleSet>& by_n, const Tolerances& tol = {});

struct GrowthRow {
  int k;
  double n;
  double ratio;  // kappa_k / n
  double ratio_se;
};

struct GrowthReport {
  std::vector<GrowthRow> rows;
  std::vector<std::uint8_t> pass_by_k;  // index k-1
  bool pass;
};

/// Per k, with |kappa_k / n| deflated and inflated by n_stderr standard errors,
/// max(deflated) <= growth_factor * min(inflated). kmax <= 4.
GrowthReport cumulant_growth_check(const std::vector<SampleSet>& by_n, int kmax, const Tolerances& tol = {});

struct TailRow {
  double n;
  double s;
  double frequency;  // share of |mu - mean| >= s sd
  double bound;      // 2 exp(-min(s^2 / 2^{1+gamma}, C (n s^2)^{exponent}) / 4) at the calibrated C
  bool pass;
};

struct ConcentrationReport {
  std::vector<TailRow> rows;
  /// Largest C for which every row holds, per n; infinity when unconstrained.
  std::vector<double> calibrated_c;
  bool monotone;
  bool pass;  // monotone and every calibrated C >= 1
};

/// 500 replicates per n; s_grid non-negative and increasing.
ConcentrationReport concentration_check(const std::vector<SampleSet>& by_n, const GammaParams& params,
                                        const std::vector<double>& s_grid);

struct SllnRow {
  double n;
  double normalized;  // |mu_n - mean_n| / n^{(1+eps)/2}
};

struct SllnReport {
  std::vector<SllnRow> rows;
  bool pass;
};

/// One trajectory value and one replicate mean per n; n geometric with at least five points.
/// Passes if the sequence vanishes, or if it ends below its start with the maximum in the first half.
SllnReport slln_check(const std::vector<double>& n_grid, const std::vector<double>& trajectory,
                      const std::vector<double>& means, double eps);

struct ClusterRow {
  double r_lo;
  double r_hi;
  double m11;
  double m1;
  double gap;  // m11 - m1^2
  double gap_se;
  std::uint64_t pairs;
};

struct ClusterDecayReport {
  std::vector<ClusterRow> rows;
  std::vector<std::string> warnings;
  bool pass;  // |gap| <= n_stderr gap_se in the largest kept bin
};

/// Scores within `margin` of the boundary are edge-affected and never enter a product.
/// m_1 is the score mass per unit volume of the window eroded by `margin`. m_{1,1} on
/// [edges[b], edges[b+1]) sums xi(x) xi(y) over ordered pairs with x in the window eroded by
/// the largest edge plus `margin`, divided by that eroded volume times the shell volume.
/// Bins with fewer than `min_pairs` pairs are dropped with a warning.
ClusterDecayReport cluster_decay_check(const std::vector<PointConfig>& configs,
                                       const std::vector<std::vector<double>>& scores,
                                       const std::vector<double>& edges, std::uint64_t min_pairs,
                                       double margin = 0.0, const Tolerances& tol = {});

}  // namespace geocume
