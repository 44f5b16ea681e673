#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace geocume {

/// Volume of the d-dimensional unit ball.
inline double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: break;
  }
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline double distance2(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = x[i] - y[i];
    s += t * t;
  }
  return s;
}

/// Uniform bucket grid over a set of points for fixed-radius neighbor queries.
class NeighborGrid {
 public:
  /// `coords` holds points flat with dimension `d`; `cell` is the bucket side.
  NeighborGrid(int d, std::span<const double> coords, double cell);

  /// Calls visit(j) for every stored point j with |x_j - x| <= radius.
  template <class Visit>
  void for_each_within(std::span<const double> x, double radius, Visit&& visit) const {
    if (count_ == 0) {
      return;
    }
    const double r2 = radius * radius;
    int lo[3] = {0, 0, 0};
    int hi[3] = {0, 0, 0};
    for (int k = 0; k < d_; ++k) {
      lo[k] = clamp_cell(k, x[static_cast<std::size_t>(k)] - radius);
      hi[k] = clamp_cell(k, x[static_cast<std::size_t>(k)] + radius);
    }
    int idx[3] = {lo[0], lo[1], lo[2]};
    while (true) {
      std::size_t flat = 0;
      for (int k = d_ - 1; k >= 0; --k) {
        flat = flat * static_cast<std::size_t>(dims_[k]) + static_cast<std::size_t>(idx[k]);
      }
      for (std::uint32_t s = start_[flat]; s < start_[flat + 1]; ++s) {
        const std::uint32_t j = order_[s];
        if (distance2(x, point(j)) <= r2) {
          visit(static_cast<std::size_t>(j));
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
        break;
      }
    }
  }

  std::span<const double> point(std::size_t j) const {
    return coords_.subspan(j * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_));
  }
  std::size_t size() const { return count_; }

 private:
  int clamp_cell(int axis, double coord) const;

  int d_;
  std::span<const double> coords_;
  std::size_t count_;
  double cell_;
  double origin_[3] = {0.0, 0.0, 0.0};
  int dims_[3] = {1, 1, 1};
  std::vector<std::uint32_t> start_;
  std::vector<std::uint32_t> order_;
};

}  // namespace geocume
