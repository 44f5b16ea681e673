#include "geocume/pointproc.hpp"

#include <cmath>
#include <json.hpp>

#include "geocume/error.hpp"
#include "geocume/geometry.hpp"

namespace geocume {

Window::Window(int dim, double volume) : d(dim), n(volume) {
  if (dim < 1 || dim > 3) {
    throw Error(ErrorKind::argument, "window dimension must lie in [1, 3]");
  }
  if (!(volume > 0.0) || !std::isfinite(volume)) {
    throw Error(ErrorKind::argument, "window volume must be positive and finite");
  }
}

double Window::side() const { return std::pow(n, 1.0 / d); }

bool Window::contains(std::span<const double> x) const {
  const double h = half_side();
  for (int k = 0; k < d; ++k) {
    const double v = x[static_cast<std::size_t>(k)];
    if (!(v >= -h && v <= h)) {
      return false;
    }
  }
  return true;
}

void PointConfig::add(std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(window_.d)) {
    throw Error(ErrorKind::argument, "point dimension differs from window dimension");
  }
  if (!window_.contains(x)) {
    throw Error(ErrorKind::argument, "point lies outside the window");
  }
  coords_.insert(coords_.end(), x.begin(), x.end());
}

const std::vector<double>& PointConfig::marks() const {
  if (!marks_) {
    throw Error(ErrorKind::argument, "configuration carries no marks");
  }
  return *marks_;
}

void PointConfig::set_marks(std::vector<double> marks) {
  if (marks.size() != size()) {
    throw Error(ErrorKind::argument, "mark count differs from point count");
  }
  for (double m : marks) {
    if (!(m >= 0.0 && m <= 1.0)) {
      throw Error(ErrorKind::argument, "marks must lie in [0, 1]");
    }
  }
  marks_ = std::move(marks);
}

void PointConfig::validate() const {
  const std::size_t count = size();
  for (std::size_t i = 0; i < count; ++i) {
    if (!window_.contains(point(i))) {
      throw Error(ErrorKind::argument, "point " + std::to_string(i) + " lies outside the window");
    }
  }
  if (count > 1) {
    const NeighborGrid grid(window_.d, coords_, std::max(window_.side() / 64.0, 1e-9));
    for (std::size_t i = 0; i < count; ++i) {
      grid.for_each_within(point(i), 0.0, [&](std::size_t j) {
        if (j != i) {
          throw Error(ErrorKind::degenerate, "duplicate points " + std::to_string(i) + " and " + std::to_string(j));
        }
      });
    }
  }
  if (marks_) {
    if (marks_->size() != count) {
      throw Error(ErrorKind::argument, "mark count differs from point count");
    }
    for (double m : *marks_) {
      if (!(m >= 0.0 && m <= 1.0)) {
        throw Error(ErrorKind::argument, "marks must lie in [0, 1]");
      }
    }
  }
}

std::vector<std::vector<double>> to_points(const PointConfig& config) {
  std::vector<std::vector<double>> out;
  out.reserve(config.size());
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto p = config.point(i);
    out.emplace_back(p.begin(), p.end());
  }
  return out;
}

std::string to_json_string(const PointConfig& config) {
  nlohmann::json j;
  j["d"] = config.dimension();
  j["n"] = config.window().n;
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto p = config.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  j["points"] = std::move(pts);
  j["marks"] = config.has_marks() ? nlohmann::json(config.marks()) : nlohmann::json(nullptr);
  j["seed"] = config.seed;
  j["spec-digest"] = config.spec_digest;
  return j.dump();
}

PointConfig point_config_from_json_string(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    PointConfig config(Window(j.at("d").get<int>(), j.at("n").get<double>()));
    const auto& pts = j.at("points");
    config.reserve(pts.size());
    for (const auto& p : pts) {
      config.add(p.get<std::vector<double>>());
    }
    if (!j.at("marks").is_null()) {
      config.set_marks(j.at("marks").get<std::vector<double>>());
    }
    config.seed = j.at("seed").get<std::uint64_t>();
    config.spec_digest = j.at("spec-digest").get<std::string>();
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::file, std::string("malformed point configuration: ") + e.what());
  }
}

PointConfig sample_poisson(const Window& window, double intensity, RngSeed seed) {
  if (!(intensity > 0.0) || !std::isfinite(intensity)) {
    throw Error(ErrorKind::argument, "Poisson intensity must be positive and finite");
  }
  const double mean = intensity * window.volume();
  if (mean > kMaxExpectedPoints) {
    throw Error(ErrorKind::size, "expected point count exceeds the memory budget");
  }
  Rng rng(seed);
  const std::uint64_t count = rng.poisson(mean);
  PointConfig config(window);
  config.reserve(count);
  const double h = window.half_side();
  std::vector<double> x(static_cast<std::size_t>(window.d));
  for (std::uint64_t i = 0; i < count; ++i) {
    for (auto& v : x) {
      v = rng.uniform(-h, h);
    }
    config.add(x);
  }
  config.seed = seed.value;
  return config;
}

PointConfig attach_marks(PointConfig config, RngSeed seed) {
  if (config.has_marks()) {
    throw Error(ErrorKind::argument, "configuration is already marked");
  }
  Rng rng(seed);
  std::vector<double> marks(config.size());
  for (auto& m : marks) {
    m = rng.uniform();
  }
  config.set_marks(std::move(marks));
  return config;
}

}  // namespace geocume
