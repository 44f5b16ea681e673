#include "geocume/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geocume/error.hpp"
#include "geocume/geometry.hpp"

namespace geocume {

namespace {

// Cell centers of the bounding cube [-1, 1]^d that fall in the unit ball.
std::vector<double> unit_ball_nodes(int d, int cells_per_r) {
  const int m = 2 * cells_per_r;
  const double h = 1.0 / cells_per_r;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) {
    total *= static_cast<std::size_t>(m);
  }
  std::vector<double> nodes;
  double y[3] = {0.0, 0.0, 0.0};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double norm2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const auto idx = static_cast<int>(rest % static_cast<std::size_t>(m));
      rest /= static_cast<std::size_t>(m);
      y[k] = -1.0 + (idx + 0.5) * h;
      norm2 += y[k] * y[k];
    }
    if (norm2 <= 1.0) {
      nodes.insert(nodes.end(), y, y + d);
    }
  }
  return nodes;
}

// Coverage score of x given the relative positions (in units of r) of all points within 2r.
double coverage_from_neighbors(int d, const std::vector<double>& nodes, const std::vector<double>& rel, int k) {
  const std::size_t node_count = nodes.size() / static_cast<std::size_t>(d);
  const std::size_t nb = rel.size() / static_cast<std::size_t>(d);
  double sum = 0.0;
  for (std::size_t q = 0; q < node_count; ++q) {
    const double* y = nodes.data() + q * static_cast<std::size_t>(d);
    int count = 0;
    for (std::size_t j = 0; j < nb; ++j) {
      const double* p = rel.data() + j * static_cast<std::size_t>(d);
      double s = 0.0;
      for (int a = 0; a < d; ++a) {
        const double t = y[a] - p[a];
        s += t * t;
      }
      count += s <= 1.0 ? 1 : 0;
    }
    if (count >= k) {
      sum += 1.0 / count;
    }
  }
  return sum / static_cast<double>(node_count);
}

void check_coverage_args(int k, double r, const QuadratureParams& quad) {
  if (k < 1) {
    throw Error(ErrorKind::argument, "coverage level k must be at least 1");
  }
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw Error(ErrorKind::argument, "coverage radius must be positive");
  }
  if (quad.cells_per_r < 1) {
    throw Error(ErrorKind::argument, "quadrature needs at least one cell per radius");
  }
}

}  // namespace

std::string to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::k_coverage: return "k_coverage";
    case ScoreKind::rsa: return "rsa";
    case ScoreKind::count: return "count";
  }
  return "unknown";
}

ScoreKind score_kind_from_string(const std::string& name) {
  if (name == "k_coverage") return ScoreKind::k_coverage;
  if (name == "rsa") return ScoreKind::rsa;
  if (name == "count") return ScoreKind::count;
  throw Error(ErrorKind::config, "unknown score kind '" + name + "'");
}

ScoreModel ScoreModel::k_coverage(int k, double r) {
  ScoreModel m;
  m.kind = ScoreKind::k_coverage;
  m.k = k;
  m.r = r;
  m.validate();
  return m;
}

ScoreModel ScoreModel::rsa(double r, double b) {
  ScoreModel m;
  m.kind = ScoreKind::rsa;
  m.r = r;
  m.b = b;
  m.validate();
  return m;
}

ScoreModel ScoreModel::count() {
  ScoreModel m;
  m.kind = ScoreKind::count;
  return m;
}

void ScoreModel::validate() const {
  if (kind == ScoreKind::k_coverage && k < 1) {
    throw Error(ErrorKind::config, "k-coverage needs k >= 1");
  }
  if (kind != ScoreKind::count && !(r > 0.0)) {
    throw Error(ErrorKind::config, "score radius r must be positive");
  }
  if (!(b >= 0.0) || !(beta >= 0.0) || !(gamma1 >= 0.0) || !(gamma2 >= 0.0)) {
    throw Error(ErrorKind::config, "score growth parameters must be non-negative");
  }
}

double ScoreModel::score_bound(int d) const {
  return kind == ScoreKind::k_coverage ? unit_ball_volume(d) * std::pow(r, d) : 1.0;
}

double coverage_tolerance(int d, double r, const QuadratureParams& quad) {
  const double h = r / quad.cells_per_r;
  const double sphere = d * unit_ball_volume(d) * std::pow(r, d - 1);
  return h * std::sqrt(static_cast<double>(d)) * sphere;
}

double score_k_coverage(std::span<const double> x, const PointConfig& config, int k, double r,
                        const QuadratureParams& quad) {
  check_coverage_args(k, r, quad);
  const int d = config.dimension();
  if (x.size() != static_cast<std::size_t>(d)) {
    throw Error(ErrorKind::argument, "score point dimension differs from configuration");
  }
  bool member = false;
  std::vector<double> rel;
  for (std::size_t j = 0; j < config.size(); ++j) {
    const auto p = config.point(j);
    const double s = distance2(x, p);
    if (s == 0.0) {
      member = true;
    }
    if (s <= 4.0 * r * r) {
      for (int a = 0; a < d; ++a) {
        rel.push_back((p[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(a)]) / r);
      }
    }
  }
  if (!member) {
    throw Error(ErrorKind::argument, "score point is not a point of the configuration");
  }
  const auto nodes = unit_ball_nodes(d, quad.cells_per_r);
  return unit_ball_volume(d) * std::pow(r, d) * coverage_from_neighbors(d, nodes, rel, k);
}

std::vector<double> coverage_scores(const PointConfig& config, int k, double r, const QuadratureParams& quad) {
  check_coverage_args(k, r, quad);
  const int d = config.dimension();
  std::vector<double> out(config.size(), 0.0);
  if (config.empty()) {
    return out;
  }
  const auto nodes = unit_ball_nodes(d, quad.cells_per_r);
  const double full = unit_ball_volume(d) * std::pow(r, d);
  const NeighborGrid grid(d, config.coords(), 2.0 * r);
  std::vector<double> rel;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto x = config.point(i);
    rel.clear();
    grid.for_each_within(x, 2.0 * r, [&](std::size_t j) {
      const auto p = config.point(j);
      for (int a = 0; a < d; ++a) {
        rel.push_back((p[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(a)]) / r);
      }
    });
    out[i] = full * coverage_from_neighbors(d, nodes, rel, k);
  }
  return out;
}

std::vector<std::uint8_t> score_rsa(const PointConfig& config, double r) {
  if (!(r > 0.0)) {
    throw Error(ErrorKind::argument, "RSA radius must be positive");
  }
  if (!config.has_marks()) {
    throw Error(ErrorKind::argument, "RSA needs marked points");
  }
  const auto& marks = config.marks();
  const std::size_t n = config.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return marks[a] < marks[b]; });
  for (std::size_t i = 1; i < n; ++i) {
    if (marks[order[i]] == marks[order[i - 1]]) {
      throw Error(ErrorKind::degenerate, "RSA marks must be distinct");
    }
  }
  std::vector<std::uint8_t> accepted(n, 0);
  if (n == 0) {
    return accepted;
  }
  const NeighborGrid grid(config.dimension(), config.coords(), 2.0 * r);
  const double limit = 4.0 * r * r;
  for (std::size_t i : order) {
    const auto x = config.point(i);
    bool blocked = false;
    grid.for_each_within(x, 2.0 * r, [&](std::size_t j) {
      if (accepted[j] && distance2(x, config.point(j)) < limit) {
        blocked = true;
      }
    });
    accepted[i] = blocked ? 0 : 1;
  }
  return accepted;
}

std::optional<double> stabilization_radius_bound(const ScoreModel& model) {
  switch (model.kind) {
    case ScoreKind::k_coverage: return 2.0 * model.r;
    case ScoreKind::count: return 0.0;
    case ScoreKind::rsa: return std::nullopt;
  }
  return std::nullopt;
}

StabilizationProbe rsa_stabilization_probe(const PointConfig& config, std::size_t index, double r, double max_radius,
                                           RngSeed seed, int trials) {
  if (index >= config.size()) {
    throw Error(ErrorKind::argument, "probe index out of range");
  }
  if (!config.has_marks()) {
    throw Error(ErrorKind::argument, "RSA needs marked points");
  }
  if (!(r > 0.0) || !(max_radius >= r / 4.0) || trials < 1) {
    throw Error(ErrorKind::argument, "probe needs r > 0, max_radius >= r/4 and trials >= 1");
  }
  const int d = config.dimension();
  const auto x = config.point(index);
  const auto& marks = config.marks();
  // Coordinates relative to x; RSA is translation invariant.
  const double reach = max_radius + 4.0 * r;
  const Window probe_window(d, std::pow(2.0 * reach + 2.0, d));
  Rng rng(seed);

  StabilizationProbe out;
  const double step = r / 4.0;
  const auto steps = static_cast<int>(std::floor(max_radius / step + 1e-9));
  std::vector<double> y(static_cast<std::size_t>(d));
  for (int j = 1; j <= steps; ++j) {
    const double s = j * step;
    PointConfig base(probe_window);
    std::vector<double> base_marks;
    for (std::size_t i = 0; i < config.size(); ++i) {
      const auto p = config.point(i);
      if (distance2(p, x) <= s * s) {
        for (int a = 0; a < d; ++a) {
          y[static_cast<std::size_t>(a)] = p[static_cast<std::size_t>(a)] - x[static_cast<std::size_t>(a)];
        }
        base.add(y);
        base_marks.push_back(marks[i]);
      }
    }
    // x sits at index 0 of the base configuration.
    std::size_t self = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (distance2(base.point(i), std::vector<double>(static_cast<std::size_t>(d), 0.0)) == 0.0) {
        self = i;
      }
    }
    PointConfig ref = base;
    ref.set_marks(base_marks);
    const std::uint8_t reference = score_rsa(ref, r)[self];
    bool stable = true;
    for (int t = 0; t < trials && stable; ++t) {
      PointConfig trial = base;
      std::vector<double> trial_marks = base_marks;
      auto random_direction = [&]() {
        double norm = 0.0;
        do {
          norm = 0.0;
          for (auto& v : y) {
            v = rng.normal();
            norm += v * v;
          }
        } while (norm == 0.0);
        norm = std::sqrt(norm);
        for (auto& v : y) v /= norm;
      };
      if (t % 2 == 0) {
        // Early-marked points just outside the sphere.
        const int count = 1 + static_cast<int>(rng.index(2 * static_cast<std::uint64_t>(d)));
        for (int c = 0; c < count; ++c) {
          random_direction();
          const double rad = s * (1.0 + 1e-9) + 1e-12;
          for (auto& v : y) v *= rad;
          trial.add(y);
          trial_marks.push_back(1e-12 * (c + 1));
        }
      } else {
        const int count = 1 + static_cast<int>(rng.index(8));
        for (int c = 0; c < count; ++c) {
          random_direction();
          // Uniform radius in the annulus (s, s + 4r].
          const double rad = s + 4.0 * r * (1.0 - rng.uniform());
          for (auto& v : y) v *= rad;
          trial.add(y);
          trial_marks.push_back(rng.uniform());
        }
      }
      trial.set_marks(trial_marks);
      if (score_rsa(trial, r)[self] != reference) {
        stable = false;
      }
    }
    out.radii.push_back(s);
    out.stable.push_back(stable ? 1 : 0);
  }
  for (std::size_t j = out.radii.size(); j-- > 0;) {
    if (!out.stable[j]) {
      break;
    }
    out.radius = out.radii[j];
  }
  return out;
}

TestFunction TestFunction::constant(double c) {
  TestFunction f;
  f.kind = TestFunctionKind::constant;
  f.height = c;
  return f;
}

TestFunction TestFunction::box(std::vector<double> lo, std::vector<double> hi, double height) {
  if (lo.size() != hi.size() || lo.empty()) {
    throw Error(ErrorKind::config, "box test function needs matching non-empty corners");
  }
  TestFunction f;
  f.kind = TestFunctionKind::box;
  f.lo = std::move(lo);
  f.hi = std::move(hi);
  f.height = height;
  return f;
}

TestFunction TestFunction::bump(std::vector<double> center, double width, double height) {
  if (center.empty() || !(width > 0.0)) {
    throw Error(ErrorKind::config, "bump test function needs a center and positive width");
  }
  TestFunction f;
  f.kind = TestFunctionKind::bump;
  f.center = std::move(center);
  f.width = width;
  f.height = height;
  return f;
}

double TestFunction::operator()(std::span<const double> u) const {
  switch (kind) {
    case TestFunctionKind::constant:
      return height;
    case TestFunctionKind::box:
      if (lo.size() != u.size()) {
        throw Error(ErrorKind::config, "box test function dimension differs from the window");
      }
      for (std::size_t a = 0; a < u.size(); ++a) {
        if (u[a] < lo[a] || u[a] > hi[a]) {
          return 0.0;
        }
      }
      return height;
    case TestFunctionKind::bump: {
      if (center.size() != u.size()) {
        throw Error(ErrorKind::config, "bump test function dimension differs from the window");
      }
      const double t = distance2(u, center) / (width * width);
      return t < 1.0 ? height * std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
    }
  }
  return 0.0;
}

double TestFunction::square_integral(int d) const {
  switch (kind) {
    case TestFunctionKind::constant:
      return height * height;
    case TestFunctionKind::box: {
      double vol = 1.0;
      for (std::size_t a = 0; a < lo.size(); ++a) {
        vol *= std::max(0.0, std::min(hi[a], 0.5) - std::max(lo[a], -0.5));
      }
      return height * height * vol;
    }
    case TestFunctionKind::bump: {
      const int m = d == 3 ? 100 : 400;
      std::size_t total = 1;
      for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(m);
      std::vector<double> u(static_cast<std::size_t>(d));
      double sum = 0.0;
      for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (int a = 0; a < d; ++a) {
          u[static_cast<std::size_t>(a)] = -0.5 + (static_cast<double>(rest % static_cast<std::size_t>(m)) + 0.5) / m;
          rest /= static_cast<std::size_t>(m);
        }
        const double v = (*this)(u);
        sum += v * v;
      }
      return sum / static_cast<double>(total);
    }
  }
  return 0.0;
}

std::vector<double> point_scores(const PointConfig& config, const ScoreModel& model, const QuadratureParams& quad) {
  model.validate();
  switch (model.kind) {
    case ScoreKind::k_coverage:
      return coverage_scores(config, model.k, model.r, quad);
    case ScoreKind::rsa: {
      const auto acc = score_rsa(config, model.r);
      return {acc.begin(), acc.end()};
    }
    case ScoreKind::count:
      break;
  }
  return std::vector<double>(config.size(), 1.0);
}

double evaluate_statistic(const PointConfig& config, const ScoreModel& model, const TestFunction& f,
                          const QuadratureParams& quad) {
  if (config.empty()) {
    model.validate();
    return 0.0;
  }
  const std::vector<double> xi = point_scores(config, model, quad);
  const double scale = 1.0 / config.window().side();
  std::vector<double> u(static_cast<std::size_t>(config.dimension()));
  double sum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] == 0.0) {
      continue;
    }
    const auto x = config.point(i);
    for (std::size_t a = 0; a < u.size(); ++a) {
      u[a] = x[a] * scale;
    }
    sum += xi[i] * f(u);
  }
  return sum;
}

}  // namespace geocume
