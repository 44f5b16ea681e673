#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geocume/rng.hpp"

namespace geocume {

/// The box W_n = [-n^{1/d}/2, n^{1/d}/2]^d of volume n.
struct Window {
  int d = 2;
  double n = 1.0;

  Window() = default;
  Window(int dim, double volume);

  double side() const;
  double half_side() const { return 0.5 * side(); }
  double volume() const { return n; }
  bool contains(std::span<const double> x) const;

  friend bool operator==(const Window&, const Window&) = default;
};

/// Finite point set in a window, with optional marks in [0, 1].
///
/// Coordinates are stored flat: point i occupies coords()[i*d, (i+1)*d).
class PointConfig {
 public:
  PointConfig() = default;
  explicit PointConfig(Window window) : window_(window) {}

  const Window& window() const { return window_; }
  int dimension() const { return window_.d; }
  std::size_t size() const { return window_.d == 0 ? 0 : coords_.size() / static_cast<std::size_t>(window_.d); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(window_.d), static_cast<std::size_t>(window_.d)};
  }
  const std::vector<double>& coords() const { return coords_; }

  /// Appends a point; throws if it lies outside the window.
  void add(std::span<const double> x);
  void reserve(std::size_t count) { coords_.reserve(count * static_cast<std::size_t>(window_.d)); }

  bool has_marks() const { return marks_.has_value(); }
  const std::vector<double>& marks() const;
  void set_marks(std::vector<double> marks);

  /// Checks window membership, distinctness and mark range; throws on violation.
  void validate() const;

  /// Provenance recorded by the sampler and the cache.
  std::uint64_t seed = 0;
  std::string spec_digest;

  friend bool operator==(const PointConfig&, const PointConfig&) = default;

 private:
  Window window_;
  std::vector<double> coords_;
  std::optional<std::vector<double>> marks_;
};

std::vector<std::vector<double>> to_points(const PointConfig& config);

/// JSON object {d, n, points, marks|null, seed, spec-digest}; doubles round-trip exactly.
std::string to_json_string(const PointConfig& config);
PointConfig point_config_from_json_string(const std::string& text);

inline constexpr double kMaxExpectedPoints = 1e7;

/// Homogeneous Poisson process of the given intensity on the window.
PointConfig sample_poisson(const Window& window, double intensity, RngSeed seed);

/// Independent uniform [0, 1] marks. Throws if the configuration is already marked.
PointConfig attach_marks(PointConfig config, RngSeed seed);

}  // namespace geocume
