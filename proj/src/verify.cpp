#include "geocume/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "geocume/combinatorics.hpp"
#include "geocume/error.hpp"
#include "geocume/geometry.hpp"
#include "geocume/matrixkit.hpp"
#include "geocume/rng.hpp"
#include "geocume/sigeom.hpp"

namespace geocume {

namespace {

using json = nlohmann::json;

constexpr std::uint64_t kVerifySeed = 20240611;

class Tally {
 public:
  Tally(std::string suite, std::string name) {
    c_.suite = std::move(suite);
    c_.name = std::move(name);
  }

  void record(bool ok, const std::function<json()>& detail) {
    ++c_.cases;
    if (!ok && c_.failures++ == 0) c_.first_failure = detail().dump();
  }

  VerifyCase done() const { return c_; }

 private:
  VerifyCase c_;
};

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(b), 1.0); }

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const CMatrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(complex_json(a(i, j)));
    rows.push_back(row);
  }
  return rows;
}

CMatrix random_matrix(Rng& rng, int n, double scale = 1.0) {
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = scale * Complex(rng.normal(), rng.normal());
  }
  return a;
}

double partition_sum_cumulant(const MomentTable& m) {
  double total = 0.0;
  for_each_partition(full_set(m.ground_size()), [&](std::span<const IndexSet> parts) {
    const auto k = static_cast<int>(parts.size());
    double term = std::tgamma(k) * (k % 2 == 1 ? 1.0 : -1.0);
    for (IndexSet part : parts) term *= m.at(part);
    total += term;
  });
  return total;
}

MomentTable random_moments(Rng& rng, int p) {
  return MomentTable::from_function(p, [&](IndexSet) { return rng.uniform(0.5, 1.5); });
}

std::vector<VerifyCase> combinatorics_suite() {
  std::vector<VerifyCase> out;
  Rng rng(derive_seed(RngSeed{kVerifySeed}, {1}));

  Tally clustering("combinatorics", "clustering_identity");
  for (int p = 2; p <= 6; ++p) {
    for (int t = 0; t < 100; ++t) {
      const MomentTable m = random_moments(rng, p);
      const double oracle = partition_sum_cumulant(m);
      for (IndexSet block = 1; block < full_set(p); block += 2) {
        const double sum = evaluate_terms(clustering_decomposition(m, block), m);
        clustering.record(close(sum, oracle, 1e-10), [&] {
          return json{{"p", p}, {"block", set_to_string(block)}, {"decomposition", sum}, {"oracle", oracle}};
        });
      }
    }
  }
  out.push_back(clustering.done());

  Tally roundtrip("combinatorics", "moment_cumulant_roundtrip");
  for (int p = 1; p <= 6; ++p) {
    for (int t = 0; t < 20; ++t) {
      const MomentTable m = random_moments(rng, p);
      const SubsetTable kappa = moments_to_cumulants(m);
      const MomentTable back = cumulants_to_moments(kappa);
      const double direct = partition_sum_cumulant(m);
      bool ok = close(kappa.at(full_set(p)), direct, 1e-10);
      for (IndexSet s = 1; s <= full_set(p); ++s) ok = ok && close(back.at(s), m.at(s), 1e-10);
      roundtrip.record(ok, [&] { return json{{"p", p}, {"trial", t}}; });
    }
  }
  out.push_back(roundtrip.done());

  Tally counts("combinatorics", "bell_stirling_counts");
  for (int p = 1; p <= 12; ++p) {
    std::vector<std::uint64_t> by_blocks(static_cast<std::size_t>(p) + 1, 0);
    std::uint64_t total = 0;
    for_each_partition(full_set(p), [&](std::span<const IndexSet> parts) {
      ++total;
      ++by_blocks[parts.size()];
    });
    bool ok = total == bell(p);
    for (int k = 1; k <= p; ++k) ok = ok && by_blocks[static_cast<std::size_t>(k)] == stirling2(p, k);
    counts.record(ok, [&] { return json{{"p", p}, {"enumerated", total}, {"bell", bell(p)}}; });
  }
  out.push_back(counts.done());

  Tally dobinski("combinatorics", "touchard_dobinski");
  for (int nu = 0; nu <= 8; ++nu) {
    for (double s : {0.5, 1.0, 2.0, 3.0}) {
      // Dobinski: T_nu(s) = e^{-s} sum_j j^nu s^j / j!.
      double series = nu == 0 ? 1.0 : 0.0;
      for (int j = 1; j <= 200; ++j) {
        series += std::exp(nu * std::log(j) + j * std::log(s) - std::lgamma(j + 1.0));
      }
      series *= std::exp(-s);
      const double value = touchard(nu, s);
      dobinski.record(close(value, series, 1e-10),
                      [&] { return json{{"nu", nu}, {"s", s}, {"touchard", value}, {"dobinski", series}}; });
    }
  }
  out.push_back(dobinski.done());

  Tally psum("combinatorics", "partition_sum_bound");
  for (int p = 1; p <= 10; ++p) {
    for (double c : {0.0, 0.5, 1.0, 1.5, 2.0}) {
      const PartitionSumAudit a = partition_sum_bound_check(p, c);
      psum.record(a.ok, [&] { return json{{"p", p}, {"c", c}, {"lhs", a.lhs}, {"rhs", a.rhs}}; });
    }
  }
  out.push_back(psum.done());

  Tally tseries("combinatorics", "touchard_series_bound");
  for (double a : {0.0, 0.25, 0.5}) {
    for (int nu = 0; nu <= 3; ++nu) {
      for (double s : {0.5, 1.0, 2.0}) {
        const TouchardSeriesAudit r = touchard_series_check(a, nu, s);
        tseries.record(r.ok, [&] {
          return json{{"a", a}, {"nu", nu}, {"s", s}, {"series", r.series}, {"outer", r.outer_bound},
                      {"monotone", r.tail_monotone}};
        });
      }
    }
  }
  out.push_back(tseries.done());
  return out;
}

std::vector<VerifyCase> matrix_suite() {
  std::vector<VerifyCase> out;
  Rng rng(derive_seed(RngSeed{kVerifySeed}, {2}));

  Tally lu("matrix", "det_alpha_vs_lu");
  for (int t = 0; t < 1000; ++t) {
    const int n = 1 + t % 8;
    const CMatrix a = random_matrix(rng, n);
    const Complex perm_sum = det_alpha(a, -1.0);
    const Complex pivot = det_lu(a);
    lu.record(std::abs(perm_sum - pivot) <= 1e-9 * std::max(std::abs(pivot), 1.0), [&] {
      return json{{"matrix", matrix_json(a)}, {"det_alpha", complex_json(perm_sum)}, {"det_lu", complex_json(pivot)}};
    });
  }
  out.push_back(lu.done());

  Tally closed("matrix", "alpha_closed_forms");
  for (int t = 0; t < 50; ++t) {
    const double x = static_cast<double>(rng.index(9)) - 4.0;
    const double y = static_cast<double>(rng.index(9)) - 4.0;
    const double z = static_cast<double>(rng.index(9)) - 4.0;
    const double w = static_cast<double>(rng.index(9)) - 4.0;
    CMatrix a(2, 2);
    a << x, y, z, w;
    for (double alpha : {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
      const Complex got = det_alpha(a, alpha);
      const double want = x * w + alpha * y * z;
      closed.record(got == Complex(want, 0.0), [&] {
        return json{{"matrix", matrix_json(a)}, {"alpha", alpha}, {"got", complex_json(got)}, {"want", want}};
      });
    }
  }
  double factorial = 1.0;
  for (int n = 1; n <= 7; ++n) {
    factorial *= n;
    const CMatrix ones = CMatrix::Ones(n, n);
    const Complex perm = det_alpha(ones, 1.0);
    closed.record(perm == Complex(factorial, 0.0),
                  [&] { return json{{"n", n}, {"permanent", complex_json(perm)}, {"factorial", factorial}}; });
  }
  out.push_back(closed.done());

  Tally schatten("matrix", "schatten1_properties");
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + t % 6;
    const CMatrix b = random_matrix(rng, n);
    const CMatrix psd = b * b.adjoint();
    const double trace = psd.trace().real();
    const double s = schatten1(psd);
    const CMatrix c = random_matrix(rng, n);
    const double lhs = schatten1(b + c);
    const double rhs = schatten1(b) + schatten1(c);
    schatten.record(std::abs(s - trace) <= 1e-8 * std::max(trace, 1.0) && lhs <= rhs * (1.0 + 1e-12),
                    [&] { return json{{"n", n}, {"schatten1", s}, {"trace", trace}, {"triangle", {lhs, rhs}}}; });
  }
  out.push_back(schatten.done());

  Tally continuity("matrix", "det_continuity");
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + t % 6;
    const CMatrix a = random_matrix(rng, n, 0.5);
    const CMatrix b = t % 2 == 0 ? CMatrix(a + random_matrix(rng, n, 0.05)) : random_matrix(rng, n, 0.5);
    const ContinuityAudit r = det_continuity_check(a, b);
    continuity.record(r.ok, [&] {
      return json{{"a", matrix_json(a)}, {"b", matrix_json(b)}, {"gap", r.gap}, {"bound", r.bound}};
    });
  }
  out.push_back(continuity.done());

  Tally block("matrix", "dpp_block_factorization");
  const KernelSpec ginibre = KernelSpec::ginibre();
  for (int t = 0; t < 500; ++t) {
    const int p = 2 + t % 5;
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < p; ++i) pts.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    const IndexSet set = static_cast<IndexSet>(1 + rng.index(full_set(p) - 1));
    const BlockGapAudit r = dpp_block_factorization_gap(pts, ginibre, set);
    block.record(r.ok(), [&] {
      return json{{"points", pts}, {"block", set_to_string(set)}, {"lhs", r.lhs}, {"rhs", r.rhs}};
    });
  }
  out.push_back(block.done());

  Tally repulsion("matrix", "alpha_repulsion");
  for (int t = 0; t < 200; ++t) {
    const std::vector<std::vector<double>> pts = {{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)},
                                                  {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)}};
    const double m = 1.0 + static_cast<double>(t % 4);
    const double rho2 = alpha_correlation(pts, ginibre, -1.0 / m).real();
    const double rho1 = alpha_correlation({pts[0]}, ginibre, -1.0 / m).real() *
                        alpha_correlation({pts[1]}, ginibre, -1.0 / m).real();
    repulsion.record(rho2 <= rho1 * (1.0 + 1e-12),
                     [&] { return json{{"points", pts}, {"alpha", -1.0 / m}, {"rho2", rho2}, {"rho1_sq", rho1}}; });
  }
  out.push_back(repulsion.done());
  return out;
}

std::vector<VerifyCase> sigeom_suite() {
  std::vector<VerifyCase> out;
  Rng rng(derive_seed(RngSeed{kVerifySeed}, {3}));

  Tally conn("sigeom", "sig_connectivity");
  Tally homo("sigeom", "sig_homogeneity");
  Tally perm("sigeom", "sig_permutation");
  for (int t = 0; t < 10000; ++t) {
    SigConfig cfg;
    cfg.d = 1 + t % 3;
    const int p = 2 + (t / 3) % 5;
    for (int i = 0; i < (p - 1) * cfg.d; ++i) cfg.x.push_back(rng.normal());
    const double nrm = sig_norm(cfg);
    bool ok = sig_connected(cfg, nrm) && (nrm == 0.0 || !sig_connected(cfg, nrm * (1.0 - 1e-9)));
    for (double f : {0.25, 0.5, 0.9, 0.999, 1.001, 1.1, 2.0, 4.0}) {
      ok = ok && sig_connected(cfg, nrm * f) == (f >= 1.0);
    }
    conn.record(ok, [&] { return json{{"d", cfg.d}, {"x", cfg.x}, {"sig_norm", nrm}}; });

    for (double s : {0.3, -2.0, 7.5}) {
      SigConfig scaled = cfg;
      for (auto& v : scaled.x) v *= s;
      const double got = sig_norm(scaled);
      homo.record(std::abs(got - std::abs(s) * nrm) <= 1e-12 * std::max(std::abs(s) * nrm, 1e-300), [&] {
        return json{{"d", cfg.d}, {"x", cfg.x}, {"scale", s}, {"scaled_norm", got}, {"norm", nrm}};
      });
    }

    std::vector<int> order(static_cast<std::size_t>(p - 1));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    SigConfig permuted{cfg.d, {}};
    for (int i : order) {
      for (int k = 0; k < cfg.d; ++k) permuted.x.push_back(cfg.x[static_cast<std::size_t>(i * cfg.d + k)]);
    }
    const double pn = sig_norm(permuted);
    perm.record(std::abs(pn - nrm) <= 1e-12 * std::max(nrm, 1e-300),
                [&] { return json{{"d", cfg.d}, {"x", cfg.x}, {"permuted_norm", pn}, {"norm", nrm}}; });
  }
  out.push_back(conn.done());
  out.push_back(homo.done());
  out.push_back(perm.done());

  Tally volume("sigeom", "sig_volume_bound");
  const std::pair<int, int> dp[] = {{1, 2}, {1, 3}, {2, 2}, {2, 3}};
  for (const auto& [d, p] : dp) {
    const SigVolumeEstimate v = sig_volume_mc(d, p, 1u << 20, derive_seed(RngSeed{kVerifySeed}, {4, 10u * d + p}));
    bool ok = v.estimate <= v.tree_bound + 3.0 * v.stderr_ && v.estimate <= v.lemma_bound + 3.0 * v.stderr_;
    if (p == 2) ok = ok && std::abs(v.estimate - unit_ball_volume(d)) <= 3.0 * v.stderr_ + 1e-12;
    volume.record(ok, [&] {
      return json{{"d", d}, {"p", p}, {"estimate", v.estimate}, {"stderr", v.stderr_}, {"tree_bound", v.tree_bound}};
    });
  }
  out.push_back(volume.done());

  Tally coarea("sigeom", "coarea_identity");
  CoareaCase cases[5];
  cases[0] = {2, HomogeneousNorm::euclidean, RadialProfile::exp, 2, {1.0}};
  cases[1] = {2, HomogeneousNorm::euclidean, RadialProfile::gauss, 2, {1.0}};
  cases[2] = {1, HomogeneousNorm::max_norm, RadialProfile::indicator_poly, 2, {1.0}};
  cases[3] = {2, HomogeneousNorm::max_norm, RadialProfile::indicator_poly, 2, {1.0, -0.5, 2.0}};
  cases[4] = {1, HomogeneousNorm::sig, RadialProfile::exp, 3, {1.0}};
  for (const auto& c : cases) {
    const CoareaAudit a = coarea_identity_check(c);
    coarea.record(a.ok, [&] {
      return json{{"d", c.d}, {"norm", static_cast<int>(c.norm)}, {"profile", static_cast<int>(c.profile)},
                  {"lhs", a.lhs}, {"rhs", a.rhs}, {"tolerance", a.tolerance}};
    });
  }
  out.push_back(coarea.done());

  Tally decay("sigeom", "integral_decay_bounds");
  struct DecayCase {
    int d;
    int p;
    DecayMode mode;
    double exact;  // closed form, or negative when unknown
  };
  const DecayCase decay_cases[] = {
      {1, 2, {DecayMode::Kind::power, 3.0, 1.0, 1.0}, 3.0},
      {1, 2, {DecayMode::Kind::exp, 3.0, 1.0, 1.0}, 4.0 / std::exp(1.0)},
      {2, 3, {DecayMode::Kind::power, 6.0, 1.0, 1.0}, -1.0},
      {2, 3, {DecayMode::Kind::exp, 3.0, 1.0, 2.0}, -1.0},
  };
  for (const auto& c : decay_cases) {
    const DecayIntegralAudit a =
        integral_decay_bounds_check(c.d, c.p, c.mode, 1u << 18, derive_seed(RngSeed{kVerifySeed}, {5}));
    bool ok = a.ok;
    if (c.exact > 0.0) ok = ok && std::abs(a.value - c.exact) <= 3.0 * a.stderr_ + 1e-12;
    decay.record(ok, [&] {
      return json{{"d", c.d}, {"p", c.p}, {"value", a.value}, {"stderr", a.stderr_}, {"bound", a.bound}};
    });
  }
  out.push_back(decay.done());
  return out;
}

}  // namespace

bool VerifyReport::pass() const {
  return std::all_of(cases.begin(), cases.end(), [](const VerifyCase& c) { return c.pass(); });
}

VerifyReport cmd_verify(const std::string& suite) {
  const bool all = suite == "all";
  if (!all && suite != "combinatorics" && suite != "matrix" && suite != "sigeom") {
    throw Error(ErrorKind::argument, "unknown verify suite '" + suite + "'");
  }
  VerifyReport report;
  auto append = [&](std::vector<VerifyCase> cases) {
    for (auto& c : cases) report.cases.push_back(std::move(c));
  };
  if (all || suite == "combinatorics") append(combinatorics_suite());
  if (all || suite == "matrix") append(matrix_suite());
  if (all || suite == "sigeom") append(sigeom_suite());
  return report;
}

}  // namespace geocume
