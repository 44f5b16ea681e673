#include "geocume/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "geocume/error.hpp"
#include "geocume/geometry.hpp"

namespace geocume {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Point set with a bucket grid supporting insertion, removal and radius queries.
class DynamicPoints {
 public:
  DynamicPoints(const Window& window, double range) : d_(window.d), half_(window.half_side()) {
    const double side = window.side();
    per_axis_ = range > 0.0 ? std::max(1, static_cast<int>(std::floor(side / range))) : 1;
    per_axis_ = std::min(per_axis_, 1024);
    cell_ = side / per_axis_;
    std::size_t total = 1;
    for (int k = 0; k < d_; ++k) {
      total *= static_cast<std::size_t>(per_axis_);
    }
    buckets_.resize(total);
  }

  std::size_t size() const { return cell_of_.size(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }

  void insert(std::span<const double> x) {
    const std::size_t cell = bucket_of(x);
    coords_.insert(coords_.end(), x.begin(), x.end());
    cell_of_.push_back(cell);
    buckets_[cell].push_back(static_cast<std::uint32_t>(cell_of_.size() - 1));
  }

  void remove(std::size_t i) {
    const std::size_t last = cell_of_.size() - 1;
    erase_from_bucket(cell_of_[i], i);
    if (i != last) {
      erase_from_bucket(cell_of_[last], last);
      std::copy_n(coords_.begin() + static_cast<std::ptrdiff_t>(last * static_cast<std::size_t>(d_)), d_,
                  coords_.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(d_)));
      cell_of_[i] = cell_of_[last];
      buckets_[cell_of_[i]].push_back(static_cast<std::uint32_t>(i));
    }
    coords_.resize(last * static_cast<std::size_t>(d_));
    cell_of_.pop_back();
  }

  /// visit(j, dist2) for stored points within `radius` of x, skipping index `skip`.
  /// Stops early when visit returns false.
  template <class Visit>
  void for_each_within(std::span<const double> x, double radius, std::size_t skip, Visit&& visit) const {
    const double r2 = radius * radius;
    int lo[3] = {0, 0, 0};
    int hi[3] = {0, 0, 0};
    for (int k = 0; k < d_; ++k) {
      lo[k] = axis_cell(x[static_cast<std::size_t>(k)] - radius);
      hi[k] = axis_cell(x[static_cast<std::size_t>(k)] + radius);
    }
    int idx[3] = {lo[0], lo[1], lo[2]};
    while (true) {
      std::size_t flat = 0;
      for (int k = d_ - 1; k >= 0; --k) {
        flat = flat * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(idx[k]);
      }
      for (std::uint32_t j : buckets_[flat]) {
        if (j == skip) {
          continue;
        }
        const double s = distance2(x, point(j));
        if (s <= r2 && !visit(static_cast<std::size_t>(j), s)) {
          return;
        }
      }
      int k = 0;
      while (k < d_) {
        if (++idx[k] <= hi[k]) {
          break;
        }
        idx[k] = lo[k];
        ++k;
      }
      if (k == d_) {
        return;
      }
    }
  }

  PointConfig to_config(const Window& window) const {
    PointConfig config(window);
    config.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      config.add(point(i));
    }
    return config;
  }

 private:
  int axis_cell(double v) const {
    const double t = std::floor((v + half_) / cell_);
    return static_cast<int>(std::clamp(t, 0.0, static_cast<double>(per_axis_ - 1)));
  }

  std::size_t bucket_of(std::span<const double> x) const {
    std::size_t flat = 0;
    for (int k = d_ - 1; k >= 0; --k) {
      flat = flat * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(axis_cell(x[static_cast<std::size_t>(k)]));
    }
    return flat;
  }

  void erase_from_bucket(std::size_t cell, std::size_t i) {
    auto& b = buckets_[cell];
    const auto it = std::find(b.begin(), b.end(), static_cast<std::uint32_t>(i));
    *it = b.back();
    b.pop_back();
  }

  int d_;
  double half_;
  int per_axis_ = 1;
  double cell_ = 1.0;
  std::vector<double> coords_;
  std::vector<std::size_t> cell_of_;
  std::vector<std::vector<std::uint32_t>> buckets_;
};

// Midpoint-grid offsets covering the ball of radius r around the origin.
struct BallStencil {
  std::vector<double> offsets;  // flat, d per node
  double cell_volume = 0.0;
};

BallStencil make_ball_stencil(int d, double r, int cells_per_radius) {
  BallStencil st;
  const int m = 2 * cells_per_radius;
  const double h = r / cells_per_radius;
  st.cell_volume = std::pow(h, d);
  int idx[3] = {0, 0, 0};
  const std::size_t total = static_cast<std::size_t>(std::pow(m, d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double norm2 = 0.0;
    double y[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k < d; ++k) {
      idx[k] = static_cast<int>(rest % static_cast<std::size_t>(m));
      rest /= static_cast<std::size_t>(m);
      y[k] = -r + (idx[k] + 0.5) * h;
      norm2 += y[k] * y[k];
    }
    if (norm2 <= r * r) {
      st.offsets.insert(st.offsets.end(), y, y + d);
    }
  }
  return st;
}

class Energy {
 public:
  Energy(const GibbsSpec& spec, int d, int area_cells) : spec_(spec), d_(d) {
    if (spec.kind == GibbsClass::area_interaction) {
      stencil_ = make_ball_stencil(d, spec.radius, area_cells);
    }
  }

  /// H(X + u) - H(X), with `skip` excluded from X.
  double added(const DynamicPoints& pts, std::span<const double> u, std::size_t skip) const {
    switch (spec_.kind) {
      case GibbsClass::pair_potential: {
        double sum = 0.0;
        const double s0 = spec_.s0;
        pts.for_each_within(u, spec_.interaction_range(), skip, [&](std::size_t, double s2) {
          const double phi = spec_.phi(std::sqrt(s2));
          if (std::isinf(phi) || (s0 > 0.0 && s2 < s0 * s0)) {
            sum = kInf;
            return false;
          }
          sum += phi;
          return true;
        });
        return std::isinf(sum) ? kInf : 2.0 * sum;
      }
      case GibbsClass::hard_core:
      case GibbsClass::truncated_poisson: {
        const double limit = spec_.kind == GibbsClass::hard_core ? 2.0 * spec_.s0 : spec_.min_distance;
        bool blocked = false;
        pts.for_each_within(u, limit, skip, [&](std::size_t, double s2) {
          if (s2 < limit * limit) {
            blocked = true;
            return false;
          }
          return true;
        });
        if (blocked) {
          return kInf;
        }
        return spec_.kind == GibbsClass::hard_core ? spec_.c1 : 0.0;
      }
      case GibbsClass::area_interaction: {
        std::vector<std::size_t> near;
        pts.for_each_within(u, 2.0 * spec_.radius, skip, [&](std::size_t j, double) {
          near.push_back(j);
          return true;
        });
        const double r2 = spec_.radius * spec_.radius;
        std::size_t uncovered = 0;
        double y[3] = {0.0, 0.0, 0.0};
        const std::size_t nodes = stencil_.offsets.size() / static_cast<std::size_t>(d_);
        for (std::size_t q = 0; q < nodes; ++q) {
          for (int k = 0; k < d_; ++k) {
            y[k] = u[static_cast<std::size_t>(k)] + stencil_.offsets[q * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)];
          }
          const std::span<const double> ys(y, static_cast<std::size_t>(d_));
          bool covered = false;
          for (std::size_t j : near) {
            if (distance2(ys, pts.point(j)) <= r2) {
              covered = true;
              break;
            }
          }
          uncovered += covered ? 0 : 1;
        }
        return static_cast<double>(uncovered) * stencil_.cell_volume + spec_.c1;
      }
    }
    return 0.0;
  }

 private:
  const GibbsSpec& spec_;
  int d_;
  BallStencil stencil_;
};

}  // namespace

std::string to_string(GibbsClass kind) {
  switch (kind) {
    case GibbsClass::pair_potential: return "pair_potential";
    case GibbsClass::hard_core: return "hard_core";
    case GibbsClass::area_interaction: return "area_interaction";
    case GibbsClass::truncated_poisson: return "truncated_poisson";
  }
  return "unknown";
}

GibbsClass gibbs_class_from_string(const std::string& name) {
  if (name == "pair_potential") return GibbsClass::pair_potential;
  if (name == "hard_core") return GibbsClass::hard_core;
  if (name == "area_interaction") return GibbsClass::area_interaction;
  if (name == "truncated_poisson") return GibbsClass::truncated_poisson;
  throw Error(ErrorKind::config, "unknown Gibbs class '" + name + "'");
}

void GibbsSpec::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::config, "Gibbs base intensity lambda must be positive");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorKind::config, "Gibbs inverse temperature beta must be non-negative");
  }
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) {
    throw Error(ErrorKind::config, "Gibbs constants c1, c2 must be non-negative");
  }
  switch (kind) {
    case GibbsClass::pair_potential:
      if (!(s0 >= 0.0)) {
        throw Error(ErrorKind::config, "pair potential hard-core radius s0 must be non-negative");
      }
      if (phi_radii.size() != phi_values.size()) {
        throw Error(ErrorKind::config, "pair potential table needs matching radii and values");
      }
      if (phi_radii.empty() && !(c2 > 0.0)) {
        throw Error(ErrorKind::config, "exponential pair potential needs c2 > 0");
      }
      for (std::size_t i = 0; i < phi_radii.size(); ++i) {
        if (i > 0 && !(phi_radii[i] > phi_radii[i - 1])) {
          throw Error(ErrorKind::config, "pair potential radii must be strictly increasing");
        }
        if (!(phi_values[i] >= 0.0)) {
          throw Error(ErrorKind::config, "pair potential must be non-negative");
        }
      }
      break;
    case GibbsClass::hard_core:
      if (!(s0 > 0.0)) {
        throw Error(ErrorKind::config, "hard-core radius s0 must be positive");
      }
      break;
    case GibbsClass::area_interaction:
      if (!(radius > 0.0)) {
        throw Error(ErrorKind::config, "area-interaction grain radius must be positive");
      }
      break;
    case GibbsClass::truncated_poisson:
      if (!(min_distance > 0.0)) {
        throw Error(ErrorKind::config, "truncated Poisson minimum distance must be positive");
      }
      break;
  }
}

double GibbsSpec::phi(double s) const {
  if (s < s0) {
    return kInf;
  }
  if (phi_radii.empty()) {
    return c1 * std::exp(-c2 * s);
  }
  if (s >= phi_radii.back()) {
    return 0.0;
  }
  if (s <= phi_radii.front()) {
    return phi_values.front();
  }
  const auto it = std::upper_bound(phi_radii.begin(), phi_radii.end(), s);
  const auto j = static_cast<std::size_t>(it - phi_radii.begin());
  const double t = (s - phi_radii[j - 1]) / (phi_radii[j] - phi_radii[j - 1]);
  return (1.0 - t) * phi_values[j - 1] + t * phi_values[j];
}

double GibbsSpec::interaction_range() const {
  switch (kind) {
    case GibbsClass::pair_potential: {
      if (!phi_radii.empty()) {
        return std::max(s0, phi_radii.back());
      }
      // Truncate the exponential tail where it drops below 1e-12 of c1.
      const double tail = c1 > 0.0 ? std::log(1e12) / c2 : 0.0;
      return std::max(s0, tail);
    }
    case GibbsClass::hard_core: return 2.0 * s0;
    case GibbsClass::area_interaction: return 2.0 * radius;
    case GibbsClass::truncated_poisson: return min_distance;
  }
  return 0.0;
}

GibbsResult sample_gibbs(const Window& window, const GibbsSpec& spec, const McmcParams& mcmc, RngSeed seed) {
  spec.validate();
  if (mcmc.area_cells_per_radius < 1) {
    throw Error(ErrorKind::config, "area_cells_per_radius must be at least 1");
  }
  const double mass = spec.lambda * window.volume();
  if (mass > kMaxExpectedPoints) {
    throw Error(ErrorKind::size, "expected point count exceeds the memory budget");
  }
  const auto sweep = static_cast<std::uint64_t>(std::ceil(mass));
  const std::uint64_t burn_in = mcmc.burn_in == 0 ? 10 * sweep : mcmc.burn_in;
  const std::uint64_t total = burn_in + mcmc.sweeps * sweep;

  Rng rng(seed);
  DynamicPoints pts(window, spec.interaction_range());
  const Energy energy(spec, window.d, mcmc.area_cells_per_radius);
  const double h = window.half_side();
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<double> u(static_cast<std::size_t>(window.d));
  auto draw_location = [&]() {
    for (auto& v : u) {
      v = rng.uniform(-h, h);
    }
  };

  // Start from a Poisson draw with constraint-violating points dropped.
  const std::uint64_t initial = rng.poisson(mass);
  for (std::uint64_t i = 0; i < initial; ++i) {
    draw_location();
    if (std::isfinite(energy.added(pts, u, none))) {
      pts.insert(u);
    }
  }

  auto accept = [&](double log_ratio) { return log_ratio >= 0.0 || rng.uniform() < std::exp(log_ratio); };
  // exp(-beta dH); hard constraints reject for every beta.
  auto log_weight = [&](double dh) { return std::isinf(dh) ? -kInf : (spec.beta == 0.0 ? 0.0 : -spec.beta * dh); };

  std::uint64_t counted = 0;
  std::uint64_t accepted = 0;
  for (std::uint64_t step = 0; step < total; ++step) {
    const std::uint64_t move = rng.index(3);
    bool ok = false;
    const auto count = static_cast<double>(pts.size());
    if (move == 0) {
      draw_location();
      const double dh = energy.added(pts, u, none);
      const double lw = log_weight(dh);
      if (std::isfinite(lw) && accept(std::log(mass / (count + 1.0)) + lw)) {
        pts.insert(u);
        ok = true;
      }
    } else if (move == 1) {
      if (pts.size() > 0) {
        const auto i = static_cast<std::size_t>(rng.index(pts.size()));
        const double dh = energy.added(pts, pts.point(i), i);
        // Removing x changes H by -dh; a finite dh always allows removal.
        const double lw = std::isinf(dh) ? 0.0 : (spec.beta == 0.0 ? 0.0 : spec.beta * dh);
        if (accept(std::log(count / mass) + lw)) {
          pts.remove(i);
          ok = true;
        }
      }
    } else {
      if (pts.size() > 0) {
        const auto i = static_cast<std::size_t>(rng.index(pts.size()));
        draw_location();
        const double dh_new = energy.added(pts, u, i);
        if (std::isfinite(dh_new)) {
          const double dh_old = energy.added(pts, pts.point(i), i);
          const double lw = spec.beta == 0.0 ? 0.0 : -spec.beta * (dh_new - dh_old);
          if (accept(lw)) {
            pts.remove(i);
            pts.insert(u);
            ok = true;
          }
        }
      }
    }
    if (step >= burn_in) {
      ++counted;
      accepted += ok ? 1 : 0;
    }
  }

  GibbsResult result;
  result.config = pts.to_config(window);
  result.config.seed = seed.value;
  result.proposals = total;
  result.acceptance_rate = counted > 0 ? static_cast<double>(accepted) / static_cast<double>(counted) : 0.0;
  if (counted > 0 && (result.acceptance_rate < 0.05 || result.acceptance_rate > 0.95)) {
    std::ostringstream os;
    os << "Gibbs chain acceptance rate " << result.acceptance_rate
       << " after burn-in lies outside [0.05, 0.95]; mixing may be poor";
    result.warnings.push_back(os.str());
  }
  return result;
}

}  // namespace geocume
