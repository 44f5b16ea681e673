#include "geocume/sigeom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "geocume/error.hpp"
#include "geocume/geometry.hpp"

namespace geocume {

namespace {

void check_cfg(const SigConfig& cfg) {
  if (cfg.d < 1) {
    throw Error(ErrorKind::argument, "sig configuration dimension must be positive");
  }
  if (cfg.x.empty() || cfg.x.size() % static_cast<std::size_t>(cfg.d) != 0) {
    throw Error(ErrorKind::argument, "sig configuration needs at least one point of dimension d");
  }
}

// Pairwise distances among x_0 = 0, x_1, .., x_{p-1}.
std::vector<double> distance_matrix(const SigConfig& cfg) {
  const int p = cfg.p();
  const auto d = static_cast<std::size_t>(cfg.d);
  std::vector<double> dist(static_cast<std::size_t>(p * p), 0.0);
  auto coord = [&](int i, std::size_t k) { return i == 0 ? 0.0 : cfg.x[static_cast<std::size_t>(i - 1) * d + k]; };
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double t = coord(i, k) - coord(j, k);
        s += t * t;
      }
      dist[static_cast<std::size_t>(i * p + j)] = dist[static_cast<std::size_t>(j * p + i)] = std::sqrt(s);
    }
  }
  return dist;
}

bool connected_at(const std::vector<double>& dist, int p, double r) {
  std::vector<int> parent(static_cast<std::size_t>(p));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  int components = p;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (dist[static_cast<std::size_t>(i * p + j)] <= r) {
        const int a = find(i);
        const int b = find(j);
        if (a != b) {
          parent[static_cast<std::size_t>(a)] = b;
          --components;
        }
      }
    }
  }
  return components == 1;
}

// Composite Gauss-Legendre nodes on [-t, t] with panel breaks at 0 and +-1.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule composite_rule(double t) {
  static constexpr std::array<double, 8> gx = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> gw = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                               0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                               0.2223810344533745, 0.1012285362903763};
  std::vector<double> breaks;
  auto add_segment = [&](double a, double b, double width) {
    const int m = std::max(1, static_cast<int>(std::ceil((b - a) / width - 1e-9)));
    for (int i = 0; i < m; ++i) {
      breaks.push_back(a + (b - a) * i / m);
    }
  };
  constexpr double kFine = 1.0 / 16.0;
  constexpr double kCoarse = 0.5;
  if (t <= 1.0) {
    add_segment(-t, 0.0, kFine);
    add_segment(0.0, t, kFine);
  } else {
    const double inner = std::min(t, 2.0);
    if (t > 2.0) {
      add_segment(-t, -2.0, kCoarse);
    }
    add_segment(-inner, -1.0, kFine);
    add_segment(-1.0, 0.0, kFine);
    add_segment(0.0, 1.0, kFine);
    add_segment(1.0, inner, kFine);
    if (t > 2.0) {
      add_segment(2.0, t, kCoarse);
    }
  }
  breaks.push_back(t);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  Rule rule;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i];
    const double b = breaks[i + 1];
    for (std::size_t q = 0; q < gx.size(); ++q) {
      rule.nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * gx[q]);
      rule.weights.push_back(0.5 * (b - a) * gw[q]);
    }
  }
  return rule;
}

double profile_value(const CoareaCase& c, double s) {
  switch (c.profile) {
    case RadialProfile::exp: return std::exp(-s);
    case RadialProfile::gauss: return std::exp(-s * s);
    case RadialProfile::indicator_poly: {
      if (s > 1.0) {
        return 0.0;
      }
      double v = 0.0;
      for (std::size_t j = c.coeffs.size(); j-- > 0;) {
        v = v * s + c.coeffs[j];
      }
      return v;
    }
  }
  return 0.0;
}

// integral_0^inf s^{D-1} f(s) ds in closed form.
double radial_moment(const CoareaCase& c, int dim) {
  switch (c.profile) {
    case RadialProfile::exp: return std::tgamma(static_cast<double>(dim));
    case RadialProfile::gauss: return 0.5 * std::tgamma(0.5 * dim);
    case RadialProfile::indicator_poly: {
      double v = 0.0;
      for (std::size_t j = 0; j < c.coeffs.size(); ++j) {
        v += c.coeffs[j] / (dim + static_cast<double>(j));
      }
      return v;
    }
  }
  return 0.0;
}

double norm_value(const CoareaCase& c, const double* y, int dim) {
  switch (c.norm) {
    case HomogeneousNorm::euclidean: {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += y[k] * y[k];
      return std::sqrt(s);
    }
    case HomogeneousNorm::max_norm: {
      double m = 0.0;
      for (int k = 0; k < dim; ++k) m = std::max(m, std::abs(y[k]));
      return m;
    }
    case HomogeneousNorm::sig: {
      SigConfig cfg;
      cfg.d = c.d;
      cfg.x.assign(y, y + dim);
      return sig_norm(cfg);
    }
  }
  return 0.0;
}

}  // namespace

double sig_norm(const SigConfig& cfg) {
  check_cfg(cfg);
  const int p = cfg.p();
  const std::vector<double> dist = distance_matrix(cfg);
  const int m = p - 1;
  if (m <= kMaxSigEnumeration) {
    double best = 0.0;
    // Bit i of `in` puts x_{i+1} on the origin side.
    const std::uint32_t full = (std::uint32_t{1} << m) - 1;
    for (std::uint32_t in = 0; in < full; ++in) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= m; ++j) {
        if ((in >> (j - 1)) & 1u) {
          continue;
        }
        nearest = std::min(nearest, dist[static_cast<std::size_t>(j)]);
        for (int i = 1; i <= m; ++i) {
          if ((in >> (i - 1)) & 1u) {
            nearest = std::min(nearest, dist[static_cast<std::size_t>(i * p + j)]);
          }
        }
      }
      best = std::max(best, nearest);
    }
    return best;
  }
  // The threshold is one of the pairwise distances; bisect over them.
  std::vector<double> cand;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      cand.push_back(dist[static_cast<std::size_t>(i * p + j)]);
    }
  }
  std::sort(cand.begin(), cand.end());
  std::size_t lo = 0;
  std::size_t hi = cand.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (connected_at(dist, p, cand[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return cand[lo];
}

bool sig_connected(const SigConfig& cfg, double r) {
  check_cfg(cfg);
  return connected_at(distance_matrix(cfg), cfg.p(), r);
}

SigVolumeEstimate sig_volume_mc(int d, int p, std::uint64_t samples, RngSeed seed) {
  if (d < 1 || p < 2 || samples < 2) {
    throw Error(ErrorKind::argument, "sig_volume_mc needs d >= 1, p >= 2 and at least 2 samples");
  }
  const int dim = d * (p - 1);
  const double half = static_cast<double>(p - 1);
  const double box = std::pow(2.0 * half, dim);
  constexpr std::uint64_t kBlock = 1 << 16;
  SigConfig cfg;
  cfg.d = d;
  cfg.x.resize(static_cast<std::size_t>(dim));
  std::uint64_t hits = 0;
  for (std::uint64_t start = 0, block = 0; start < samples; start += kBlock, ++block) {
    Rng rng(derive_seed(seed, {block}));
    const std::uint64_t end = std::min(samples, start + kBlock);
    for (std::uint64_t s = start; s < end; ++s) {
      for (auto& v : cfg.x) {
        v = rng.uniform(-half, half);
      }
      hits += sig_connected(cfg, 1.0) ? 1 : 0;
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  const double vd = unit_ball_volume(d);
  SigVolumeEstimate out;
  out.estimate = box * frac;
  out.stderr_ = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples - 1));
  out.tree_bound = std::pow(vd, p - 1) * std::pow(static_cast<double>(p), p - 2);
  out.lemma_bound = std::pow(std::numbers::e * vd, p - 1) * std::tgamma(p + 1.0);
  return out;
}

CoareaAudit coarea_identity_check(const CoareaCase& c) {
  if (c.d < 1) {
    throw Error(ErrorKind::argument, "coarea check needs d >= 1");
  }
  const int dim = c.norm == HomogeneousNorm::sig ? c.d * (c.p - 1) : c.d;
  if (c.norm == HomogeneousNorm::sig && c.p < 2) {
    throw Error(ErrorKind::argument, "sig norm needs p >= 2");
  }
  if (dim > 2) {
    throw Error(ErrorKind::argument, "coarea check supports integration dimension <= 2");
  }
  if (c.profile == RadialProfile::indicator_poly && c.coeffs.empty()) {
    throw Error(ErrorKind::argument, "indicator_poly profile needs coefficients");
  }
  // Box [-t, t]^D containing {u <= s_cut}; |x|_inf <= (p-1) u(x) for the sig norm.
  const double reach = c.norm == HomogeneousNorm::sig ? static_cast<double>(c.p - 1) : 1.0;
  double s_cut = 1.0;
  double tail = 0.0;
  switch (c.profile) {
    case RadialProfile::exp:
      s_cut = 40.0;
      tail = std::exp(-s_cut) * std::pow(s_cut + dim, dim);
      break;
    case RadialProfile::gauss:
      s_cut = 7.0;
      tail = std::exp(-s_cut * s_cut) * std::pow(s_cut + dim, dim);
      break;
    case RadialProfile::indicator_poly:
      s_cut = 1.0;
      break;
  }
  const double t = reach * s_cut;
  const Rule rule = composite_rule(t);
  const std::size_t m = rule.nodes.size();
  double lhs = 0.0;
  double y[2] = {0.0, 0.0};
  if (dim == 1) {
    for (std::size_t i = 0; i < m; ++i) {
      y[0] = rule.nodes[i];
      lhs += rule.weights[i] * profile_value(c, norm_value(c, y, 1));
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      y[0] = rule.nodes[i];
      double row = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        y[1] = rule.nodes[j];
        row += rule.weights[j] * profile_value(c, norm_value(c, y, 2));
      }
      lhs += rule.weights[i] * row;
    }
  }
  // Vol(u <= 1) = (1/D) integral over the unit sphere of u^{-D}.
  double vol = 0.0;
  if (dim == 1) {
    y[0] = 1.0;
    vol += 1.0 / norm_value(c, y, 1);
    y[0] = -1.0;
    vol += 1.0 / norm_value(c, y, 1);
  } else {
    constexpr int kAngles = 1 << 16;
    for (int i = 0; i < kAngles; ++i) {
      const double a = 2.0 * std::numbers::pi * (i + 0.5) / kAngles;
      y[0] = std::cos(a);
      y[1] = std::sin(a);
      const double u = norm_value(c, y, 2);
      vol += 1.0 / (u * u);
    }
    vol *= 0.5 * 2.0 * std::numbers::pi / kAngles;
  }
  const double rhs = dim * vol * radial_moment(c, dim);
  const double tolerance = 1e-3 + tail;
  return {lhs, rhs, tolerance, std::abs(lhs - rhs) <= tolerance};
}

DecayIntegralAudit integral_decay_bounds_check(int d, int p, const DecayMode& mode, std::uint64_t samples,
                                               RngSeed seed) {
  if (d < 1 || p < 2) {
    throw Error(ErrorKind::argument, "decay integral needs d >= 1 and p >= 2");
  }
  const int dim = d * (p - 1);
  if (dim > 6) {
    throw Error(ErrorKind::size, "decay integral supports d (p - 1) <= 6");
  }
  // J = integral_0^inf s^{D-1} g(max(s, 1)) ds.
  double radial = 0.0;
  if (mode.kind == DecayMode::Kind::power) {
    if (!(mode.l > dim + 1)) {
      throw Error(ErrorKind::divergence, "power decay needs l > d (p - 1) + 1");
    }
    radial = 1.0 / dim + 1.0 / (mode.l - dim);
  } else {
    if (!(mode.c > 0.0) || !(mode.a_hat > 0.0)) {
      throw Error(ErrorKind::domain, "exponential decay needs c > 0 and a_hat > 0");
    }
    const double shape = dim / mode.a_hat;
    radial = std::exp(-mode.c) / dim +
             boost::math::tgamma(shape, mode.c) / (mode.a_hat * std::pow(mode.c, shape));
  }
  const SigVolumeEstimate vol = sig_volume_mc(d, p, samples, seed);
  DecayIntegralAudit out;
  out.value = dim * vol.estimate * radial;
  out.stderr_ = dim * vol.stderr_ * radial;
  out.bound = dim * vol.lemma_bound * radial;
  out.ok = out.value - 3.0 * out.stderr_ <= out.bound;
  return out;
}

}  // namespace geocume
