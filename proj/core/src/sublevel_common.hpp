#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sectkit/ecc.hpp"
#include "sectkit/errors.hpp"

namespace sectkit::detail {

// Sorted unique filtration heights plus the generator -> height-slot map.
// Generators with bitwise-equal heights share a slot, so simplices entering
// at the same level merge into a single breakpoint.
struct SublevelIndex {
  std::vector<double> unique_heights;
  std::vector<std::uint32_t> slot;
};

inline SublevelIndex build_sublevel_index(std::vector<double> heights,
                                          double horizon,
                                          double tolerance = 1e-9) {
  SublevelIndex index;
  const std::size_t n = heights.size();
  for (double& h : heights) {
    if (h < -tolerance || h > horizon + tolerance)
      throw ValidationError("sublevel filtration: height outside [0, horizon]");
    h = std::clamp(h, 0.0, horizon);
  }
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&heights](std::uint32_t a,
                                                   std::uint32_t b) {
    return heights[a] < heights[b];
  });
  index.slot.resize(n);
  index.unique_heights.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double h = heights[order[k]];
    if (index.unique_heights.empty() || index.unique_heights.back() != h)
      index.unique_heights.push_back(h);
    index.slot[order[k]] =
        static_cast<std::uint32_t>(index.unique_heights.size() - 1);
  }
  return index;
}

inline ECCurve curve_from_slot_jumps(double horizon,
                                     const std::vector<double>& unique_heights,
                                     const std::vector<int>& jumps) {
  ECCurve curve;
  curve.horizon = horizon;
  int value = 0;
  for (std::size_t k = 0; k < unique_heights.size(); ++k) {
    if (jumps[k] == 0) continue;
    value += jumps[k];
    curve.breakpoints.push_back(unique_heights[k]);
    curve.values.push_back(value);
  }
  return curve;
}

inline void require_unit_direction(const Point& direction) {
  if (std::abs(norm(direction) - 1.0) > 1e-9)
    throw ValidationError("direction is not a unit vector");
}

}  // namespace sectkit::detail
