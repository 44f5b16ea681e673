#include "geocume/estat.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <span>

#include "geocume/combinatorics.hpp"
#include "geocume/error.hpp"
#include "geocume/geometry.hpp"

namespace geocume {

namespace {

constexpr int kSums = kMaxCumulantOrder + 1;
using PowerSums = std::array<double, kSums>;  // sums of (x - c)^j, j = 0..6

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Cumulant estimates from power sums about `center`.
std::array<double, kMaxCumulantOrder> cumulants_from_sums(const PowerSums& s, double center, int kmax) {
  const double n = s[0];
  const double mu = s[1] / n;
  PowerSums c{};  // central sums
  for (int j = 0; j <= kmax; ++j) {
    double acc = 0.0;
    for (int i = 0; i <= j; ++i) acc += binomial(j, i) * s[static_cast<std::size_t>(i)] * std::pow(-mu, j - i);
    c[static_cast<std::size_t>(j)] = acc;
  }
  std::array<double, kMaxCumulantOrder> k{};
  k[0] = center + mu;
  if (kmax >= 2) k[1] = c[2] / (n - 1.0);
  if (kmax >= 3) k[2] = n * c[3] / ((n - 1.0) * (n - 2.0));
  if (kmax >= 4) {
    k[3] = (n * (n + 1.0) * c[4] - 3.0 * (n - 1.0) * c[2] * c[2]) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
  }
  if (kmax >= 5) {
    // Plug-in: cumulants of the empirical distribution, from its central moments.
    const MomentTable moments = MomentTable::from_function(kmax, [&](IndexSet set) {
      const int size = std::popcount(set);
      return size == 1 ? 0.0 : c[static_cast<std::size_t>(size)] / n;
    });
    const SubsetTable kappa = moments_to_cumulants(moments);
    for (int order = 5; order <= kmax; ++order) {
      k[static_cast<std::size_t>(order - 1)] = kappa.at(full_set(order));
    }
  }
  return k;
}

void check_increasing_n(const std::vector<SampleSet>& by_n, const char* who) {
  for (std::size_t i = 0; i < by_n.size(); ++i) {
    if (!(by_n[i].n > 0.0) || (i > 0 && !(by_n[i].n > by_n[i - 1].n))) {
      throw Error(ErrorKind::argument, std::string(who) + ": n values must be positive and strictly increasing");
    }
  }
}

[[noreturn]] void throw_degenerate(double n) {
  throw Error(ErrorKind::variance, "sigma^2 * int f^2 > 0 assumption violated: zero sample variance at n = " +
                                       std::to_string(n));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

CumulantReport sample_cumulants(const SampleSet& samples, int kmax) {
  if (kmax < 1 || kmax > kMaxCumulantOrder) {
    throw Error(ErrorKind::argument, "sample_cumulants: kmax must be in 1..6");
  }
  const std::size_t count = samples.values.size();
  if (count < static_cast<std::size_t>(10 * kmax)) {
    throw Error(ErrorKind::sample_size, "sample_cumulants: need at least " + std::to_string(10 * kmax) +
                                            " replicates, got " + std::to_string(count));
  }
  const double center = samples.values.front();
  PowerSums total{};
  std::vector<PowerSums> terms(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double y = samples.values[i] - center;
    double power = 1.0;
    for (int j = 0; j < kSums; ++j) {
      terms[i][static_cast<std::size_t>(j)] = power;
      total[static_cast<std::size_t>(j)] += power;
      power *= y;
    }
  }

  CumulantReport report;
  report.n = samples.n;
  const auto full = cumulants_from_sums(total, center, kmax);
  report.kappa.assign(full.begin(), full.begin() + kmax);

  // Leave-one-out jackknife.
  std::vector<std::array<double, kMaxCumulantOrder>> loo(count);
  std::array<double, kMaxCumulantOrder> loo_mean{};
  for (std::size_t i = 0; i < count; ++i) {
    PowerSums s = total;
    for (int j = 0; j < kSums; ++j) s[static_cast<std::size_t>(j)] -= terms[i][static_cast<std::size_t>(j)];
    loo[i] = cumulants_from_sums(s, center, kmax);
    for (int k = 0; k < kmax; ++k) loo_mean[static_cast<std::size_t>(k)] += loo[i][static_cast<std::size_t>(k)];
  }
  const auto n = static_cast<double>(count);
  report.stderr_.resize(static_cast<std::size_t>(kmax));
  for (int k = 0; k < kmax; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double m = loo_mean[kk] / n;
    double ss = 0.0;
    for (const auto& v : loo) ss += (v[kk] - m) * (v[kk] - m);
    report.stderr_[kk] = std::sqrt((n - 1.0) / n * ss);
  }
  return report;
}

GammaResult gamma_exponent(const GammaParams& p) {
  if (!(p.a >= 0.0) || !(p.a < 1.0)) {
    throw Error(ErrorKind::domain, "gamma_exponent: a must lie in [0, 1)");
  }
  if (!(p.a_hat > 0.0)) {
    throw Error(ErrorKind::argument, "gamma_exponent: a_hat must be positive or infinite");
  }
  if (!(p.b >= 0.0) || !(p.beta >= 0.0) || !(p.gamma1 >= 0.0) || !(p.gamma2 >= 0.0) || p.d < 1) {
    throw Error(ErrorKind::argument, "gamma_exponent: b, beta, gamma1, gamma2 must be non-negative and d >= 1");
  }
  const double d = p.d;
  const bool infinite = std::isinf(p.a_hat);
  const double inv = infinite ? 0.0 : 1.0 / ((1.0 - p.a) * p.a_hat);
  const double base = 1.0 + std::max(p.gamma2, p.beta);
  GammaResult r{};
  r.first_branch = base + d * inv + p.b * d * d * inv;
  r.second_branch = base + (infinite ? 0.0 : d / p.a_hat) + p.a + p.b * d;
  const double ratio = infinite ? kInfiniteDecay : (1.0 - p.a) * p.a_hat / d;
  r.branch = ratio <= 1.0 ? 1 : 2;
  r.gamma = r.branch == 1 ? r.first_branch : r.second_branch;
  r.exponent = 1.0 / (2.0 + 4.0 * r.gamma);
  return r;
}

bool mdp_scale_admissible(double q, const GammaResult& gamma) { return q > 0.0 && q < gamma.exponent; }

std::vector<double> standardize(const std::vector<double>& values) {
  if (values.size() < 2) {
    throw Error(ErrorKind::sample_size, "standardize: need at least two values");
  }
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) {
    throw Error(ErrorKind::variance, "standardize: zero sample variance");
  }
  std::vector<double> z(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) z[i] = (values[i] - mean) / sd;
  return z;
}

double ks_distance_normal(std::vector<double> values) {
  if (values.empty()) {
    throw Error(ErrorKind::sample_size, "ks_distance_normal: empty sample");
  }
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = normal_cdf(values[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

CltReport clt_check(const std::vector<SampleSet>& by_n, const Tolerances& tol) {
  if (by_n.size() < 2) {
    throw Error(ErrorKind::sample_size, "clt_check: need at least two n values");
  }
  check_increasing_n(by_n, "clt_check");
  CltReport report{};
  report.pass = true;
  for (std::size_t i = 0; i < by_n.size(); ++i) {
    const auto& set = by_n[i];
    if (set.values.size() < 200) {
      throw Error(ErrorKind::sample_size, "clt_check: need at least 200 replicates per n");
    }
    std::vector<double> z;
    try {
      z = standardize(set.values);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::variance) throw_degenerate(set.n);
      throw;
    }
    KsRow row{set.n, ks_distance_normal(std::move(z)), 1.0 / std::sqrt(static_cast<double>(set.values.size())),
              true};
    if (i > 0) {
      row.pass = row.ks <= report.rows.back().ks + tol.ks_noise_factor * row.noise_floor;
    }
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  report.improved = report.rows.back().ks < report.rows.front().ks;
  return report;
}

VarianceReport variance_asymptotic_check(const std::vector<SampleSet>& by_n, const Tolerances& tol) {
  if (by_n.size() < 3) {
    throw Error(ErrorKind::sample_size, "variance_asymptotic_check: need at least three n values");
  }
  check_increasing_n(by_n, "variance_asymptotic_check");
  VarianceReport report{};
  for (const auto& set : by_n) {
    const CumulantReport c = sample_cumulants(set, 2);
    if (!(c.kappa[1] > 0.0)) throw_degenerate(set.n);
    report.rows.push_back({set.n, c.kappa[1] / set.n, c.stderr_[1] / set.n, c.kappa[0] / set.n, c.stderr_[0] / set.n});
  }
  const VarianceRow& last = report.rows.back();
  const VarianceRow& prev = report.rows[report.rows.size() - 2];
  report.last_gap = std::abs(last.var_per_n - prev.var_per_n);
  report.allowed = tol.stabilization_rel * std::abs(last.var_per_n) +
                   tol.n_stderr * std::sqrt(last.var_se * last.var_se + prev.var_se * prev.var_se);
  report.pass = report.last_gap <= report.allowed;
  return report;
}

GrowthReport cumulant_growth_check(const std::vector<SampleSet>& by_n, int kmax, const Tolerances& tol) {
  if (kmax < 1 || kmax > 4) {
    throw Error(ErrorKind::argument, "cumulant_growth_check: kmax must be in 1..4");
  }
  if (by_n.empty()) {
    throw Error(ErrorKind::sample_size, "cumulant_growth_check: no sample sets");
  }
  check_increasing_n(by_n, "cumulant_growth_check");
  GrowthReport report{};
  std::vector<CumulantReport> cumulants;
  for (const auto& set : by_n) {
    cumulants.push_back(sample_cumulants(set, std::max(kmax, 2)));
    if (!(cumulants.back().kappa[1] > 0.0)) throw_degenerate(set.n);
  }
  report.pass = true;
  for (int k = 1; k <= kmax; ++k) {
    const auto kk = static_cast<std::size_t>(k - 1);
    double deflated_max = 0.0;
    double inflated_min = kInfiniteDecay;
    for (const auto& c : cumulants) {
      const double ratio = c.kappa[kk] / c.n;
      const double se = c.stderr_[kk] / c.n;
      report.rows.push_back({k, c.n, ratio, se});
      deflated_max = std::max(deflated_max, std::abs(ratio) - tol.n_stderr * se);
      inflated_min = std::min(inflated_min, std::abs(ratio) + tol.n_stderr * se);
    }
    const bool ok = deflated_max <= tol.growth_factor * inflated_min;
    report.pass_by_k.push_back(ok ? 1 : 0);
    report.pass = report.pass && ok;
  }
  return report;
}

ConcentrationReport concentration_check(const std::vector<SampleSet>& by_n, const GammaParams& params,
                                        const std::vector<double>& s_grid) {
  if (by_n.empty()) {
    throw Error(ErrorKind::sample_size, "concentration_check: no sample sets");
  }
  check_increasing_n(by_n, "concentration_check");
  for (std::size_t j = 0; j < s_grid.size(); ++j) {
    if (!(s_grid[j] >= 0.0) || (j > 0 && !(s_grid[j] > s_grid[j - 1]))) {
      throw Error(ErrorKind::argument, "concentration_check: s grid must be non-negative and increasing");
    }
  }
  const GammaResult g = gamma_exponent(params);
  const double shape = std::pow(2.0, 1.0 + g.gamma);
  ConcentrationReport report{};
  report.monotone = true;
  report.pass = true;
  for (const auto& set : by_n) {
    if (set.values.size() < 500) {
      throw Error(ErrorKind::sample_size, "concentration_check: need at least 500 replicates per n");
    }
    std::vector<double> z;
    try {
      z = standardize(set.values);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::variance) throw_degenerate(set.n);
      throw;
    }
    const auto reps = static_cast<double>(z.size());
    std::vector<double> freq;
    double c_cal = kInfiniteDecay;
    for (double s : s_grid) {
      const auto hits = std::count_if(z.begin(), z.end(), [s](double v) { return std::abs(v) >= s; });
      const double f = static_cast<double>(hits) / reps;
      freq.push_back(f);
      if (f > 0.0) {
        const double limit = -4.0 * std::log(f / 2.0);
        const double gaussian_part = s * s / shape;
        if (gaussian_part > limit) {
          c_cal = std::min(c_cal, limit / std::pow(set.n * s * s, g.exponent));
        }
      }
    }
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
      const double s = s_grid[j];
      const double gaussian_part = s * s / shape;
      const double rate = std::isinf(c_cal) ? gaussian_part
                                            : std::min(gaussian_part, c_cal * std::pow(set.n * s * s, g.exponent));
      const double bound = 2.0 * std::exp(-0.25 * rate);
      const bool ok = freq[j] <= bound * (1.0 + 1e-12);
      if (j > 0 && freq[j] > freq[j - 1]) report.monotone = false;
      report.rows.push_back({set.n, s, freq[j], bound, ok});
      report.pass = report.pass && ok;
    }
    report.calibrated_c.push_back(c_cal);
    report.pass = report.pass && c_cal >= 1.0;
  }
  report.pass = report.pass && report.monotone;
  return report;
}

SllnReport slln_check(const std::vector<double>& n_grid, const std::vector<double>& trajectory,
                      const std::vector<double>& means, double eps) {
  if (!(eps > 0.0)) {
    throw Error(ErrorKind::domain, "slln_check: eps must be positive");
  }
  if (n_grid.size() < 5 || trajectory.size() != n_grid.size() || means.size() != n_grid.size()) {
    throw Error(ErrorKind::argument, "slln_check: need at least five n values with one trajectory value and mean each");
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!(n_grid[i] > 0.0) || (i > 0 && !(n_grid[i] > n_grid[i - 1]))) {
      throw Error(ErrorKind::argument, "slln_check: n grid must be positive and increasing");
    }
  }
  const double ratio = n_grid[1] / n_grid[0];
  for (std::size_t i = 2; i < n_grid.size(); ++i) {
    if (std::abs(n_grid[i] / n_grid[i - 1] - ratio) > 1e-9 * ratio) {
      throw Error(ErrorKind::argument, "slln_check: n grid must be geometric");
    }
  }
  SllnReport report;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const double v = std::abs(trajectory[i] - means[i]) / std::pow(n_grid[i], 0.5 * (1.0 + eps));
    report.rows.push_back({n_grid[i], v});
    if (v > report.rows[argmax].normalized) argmax = i;
  }
  const double peak = report.rows[argmax].normalized;
  report.pass = peak == 0.0 ||
                (report.rows.back().normalized < report.rows.front().normalized && 2 * argmax < report.rows.size());
  return report;
}

ClusterDecayReport cluster_decay_check(const std::vector<PointConfig>& configs,
                                       const std::vector<std::vector<double>>& scores,
                                       const std::vector<double>& edges, std::uint64_t min_pairs, double margin,
                                       const Tolerances& tol) {
  if (configs.size() < 2 || scores.size() != configs.size()) {
    throw Error(ErrorKind::sample_size, "cluster_decay_check: need at least two replicates with scores");
  }
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (scores[i].size() != configs[i].size()) {
      throw Error(ErrorKind::argument, "cluster_decay_check: score count differs from point count");
    }
    if (!(configs[i].window() == configs.front().window())) {
      throw Error(ErrorKind::argument, "cluster_decay_check: replicates use different windows");
    }
  }
  if (edges.size() < 2 || !(edges.front() > 0.0)) {
    throw Error(ErrorKind::argument, "cluster_decay_check: need two or more edges, the first positive");
  }
  for (std::size_t b = 1; b < edges.size(); ++b) {
    if (!(edges[b] > edges[b - 1])) {
      throw Error(ErrorKind::argument, "cluster_decay_check: edges must be increasing");
    }
  }
  const Window window = configs.front().window();
  const int d = window.d;
  const double r_max = edges.back();
  if (!(margin >= 0.0) || !std::isfinite(margin)) {
    throw Error(ErrorKind::argument, "cluster_decay_check: margin must be finite and >= 0");
  }
  const double inner_half = window.half_side() - r_max - margin;
  const double score_half = window.half_side() - margin;
  if (!(inner_half > 0.0)) {
    throw Error(ErrorKind::argument, "cluster_decay_check: largest distance leaves no interior");
  }
  const double eroded = std::pow(2.0 * inner_half, d);
  const double score_volume = std::pow(2.0 * score_half, d);
  auto inside = [d](std::span<const double> x, double half) {
    for (int k = 0; k < d; ++k) {
      if (std::abs(x[static_cast<std::size_t>(k)]) > half) return false;
    }
    return true;
  };
  const double vd = unit_ball_volume(d);
  const std::size_t nb = edges.size() - 1;
  const std::size_t reps = configs.size();

  std::vector<double> m1(reps, 0.0);
  std::vector<std::vector<double>> pair(reps, std::vector<double>(nb, 0.0));
  std::vector<std::uint64_t> pairs(nb, 0);
  for (std::size_t i = 0; i < reps; ++i) {
    const PointConfig& c = configs[i];
    for (std::size_t a = 0; a < c.size(); ++a) {
      if (inside(c.point(a), score_half)) m1[i] += scores[i][a];
    }
    m1[i] /= score_volume;
    if (c.size() < 2) continue;
    const NeighborGrid grid(d, c.coords(), r_max);
    for (std::size_t a = 0; a < c.size(); ++a) {
      const auto x = c.point(a);
      if (!inside(x, inner_half)) continue;
      grid.for_each_within(x, r_max, [&](std::size_t j) {
        if (j == a) return;
        const double r = std::sqrt(distance2(x, c.point(j)));
        if (r < edges.front() || r >= r_max) return;
        const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), r) - edges.begin()) - 1;
        pair[i][b] += scores[i][a] * scores[i][j];
        ++pairs[b];
      });
    }
  }

  ClusterDecayReport report{};
  const auto n = static_cast<double>(reps);
  double m1_sum = 0.0;
  for (double v : m1) m1_sum += v;
  for (std::size_t b = 0; b < nb; ++b) {
    if (pairs[b] < min_pairs) {
      report.warnings.push_back("cluster_decay_check: dropped bin [" + std::to_string(edges[b]) + ", " +
                                std::to_string(edges[b + 1]) + ") with " + std::to_string(pairs[b]) + " pairs");
      continue;
    }
    const double shell = vd * (std::pow(edges[b + 1], d) - std::pow(edges[b], d));
    double pair_sum = 0.0;
    for (std::size_t i = 0; i < reps; ++i) pair_sum += pair[i][b] / (eroded * shell);
    ClusterRow row{};
    row.r_lo = edges[b];
    row.r_hi = edges[b + 1];
    row.pairs = pairs[b];
    row.m11 = pair_sum / n;
    row.m1 = m1_sum / n;
    row.gap = row.m11 - row.m1 * row.m1;
    std::vector<double> loo(reps);
    double loo_mean = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      const double mm = (m1_sum - m1[i]) / (n - 1.0);
      loo[i] = (pair_sum - pair[i][b] / (eroded * shell)) / (n - 1.0) - mm * mm;
      loo_mean += loo[i];
    }
    loo_mean /= n;
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    row.gap_se = std::sqrt((n - 1.0) / n * ss);
    report.rows.push_back(row);
  }
  if (report.rows.empty()) {
    report.warnings.push_back("cluster_decay_check: every bin was dropped");
    report.pass = false;
  } else {
    const ClusterRow& last = report.rows.back();
    report.pass = std::abs(last.gap) <= tol.n_stderr * last.gap_se;
  }
  return report;
}

}  // namespace geocume
