#include "geocume/geometry.hpp"

#include <algorithm>
#include <limits>

#include "geocume/error.hpp"

namespace geocume {

NeighborGrid::NeighborGrid(int d, std::span<const double> coords, double cell)
    : d_(d), coords_(coords), count_(d > 0 ? coords.size() / static_cast<std::size_t>(d) : 0), cell_(cell) {
  if (d < 1 || d > 3) {
    throw Error(ErrorKind::argument, "NeighborGrid supports dimensions 1 to 3");
  }
  if (!(cell > 0.0)) {
    throw Error(ErrorKind::argument, "NeighborGrid cell size must be positive");
  }
  if (count_ == 0) {
    start_.assign(2, 0);
    return;
  }
  double hi[3] = {0.0, 0.0, 0.0};
  for (int k = 0; k < d_; ++k) {
    origin_[k] = std::numeric_limits<double>::infinity();
    hi[k] = -std::numeric_limits<double>::infinity();
  }
  for (std::size_t j = 0; j < count_; ++j) {
    for (int k = 0; k < d_; ++k) {
      const double v = coords_[j * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)];
      origin_[k] = std::min(origin_[k], v);
      hi[k] = std::max(hi[k], v);
    }
  }
  // Keep the bucket count within a small multiple of the point count.
  const double budget = 4.0 * static_cast<double>(count_) + 64.0;
  while (true) {
    double total = 1.0;
    for (int k = 0; k < d_; ++k) {
      total *= std::floor((hi[k] - origin_[k]) / cell_) + 1.0;
    }
    if (total <= budget) {
      break;
    }
    cell_ *= 1.5;
  }
  std::size_t total = 1;
  for (int k = 0; k < d_; ++k) {
    dims_[k] = static_cast<int>(std::floor((hi[k] - origin_[k]) / cell_)) + 1;
    total *= static_cast<std::size_t>(dims_[k]);
  }
  std::vector<std::uint32_t> bucket(count_);
  start_.assign(total + 1, 0);
  for (std::size_t j = 0; j < count_; ++j) {
    std::size_t flat = 0;
    for (int k = d_ - 1; k >= 0; --k) {
      flat = flat * static_cast<std::size_t>(dims_[k]) +
             static_cast<std::size_t>(clamp_cell(k, coords_[j * static_cast<std::size_t>(d_) + static_cast<std::size_t>(k)]));
    }
    bucket[j] = static_cast<std::uint32_t>(flat);
    ++start_[flat + 1];
  }
  for (std::size_t b = 0; b < total; ++b) {
    start_[b + 1] += start_[b];
  }
  order_.resize(count_);
  std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t j = 0; j < count_; ++j) {
    order_[fill[bucket[j]]++] = static_cast<std::uint32_t>(j);
  }
}

int NeighborGrid::clamp_cell(int axis, double coord) const {
  const double t = std::floor((coord - origin_[axis]) / cell_);
  if (t < 0.0) {
    return 0;
  }
  if (t >= static_cast<double>(dims_[axis] - 1)) {
    return dims_[axis] - 1;
  }
  return static_cast<int>(t);
}

}  // namespace geocume
