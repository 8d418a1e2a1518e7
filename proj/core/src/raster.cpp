#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sectkit/ecc.hpp"
#include "sectkit/errors.hpp"
#include "sublevel_common.hpp"

namespace sectkit {

RasterizedUnion::RasterizedUnion(const BallUnion& balls, double delta) {
  balls.validate();
  if (balls.dim != 2)
    throw ValidationError("raster backend supports planar ball unions only");
  if (!(delta > 0.0)) throw ValidationError("raster: delta must be positive");
  delta_ = delta;
  centers_ = balls.centers;
  const double r = balls.radius;

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const Point& c : centers_) {
    xmin = std::min(xmin, c[0]);
    xmax = std::max(xmax, c[0]);
    ymin = std::min(ymin, c[1]);
    ymax = std::max(ymax, c[1]);
  }
  x0_ = xmin - r - delta;
  y0_ = ymin - r - delta;
  nx_ = static_cast<int>(std::ceil((xmax + r - x0_) / delta)) + 2;
  ny_ = static_cast<int>(std::ceil((ymax + r - y0_) / delta)) + 2;
  if (static_cast<long long>(nx_) * ny_ > (1ll << 28))
    throw ResourceError("raster grid too large; increase delta");

  // Per-ball pixel lists: a pixel belongs to a ball iff the ball covers the
  // pixel center.  The per-direction sweep enters balls in height order and
  // each pixel counts once, for its earliest covering ball.
  const double r2 = r * r;
  cover_offsets_.assign(centers_.size() + 1, 0);
  for (int pass = 0; pass < 2; ++pass) {
    for (std::uint32_t b = 0; b < centers_.size(); ++b) {
      const Point& c = centers_[b];
      const int ilo = std::max(0, static_cast<int>((c[0] - r - x0_) / delta));
      const int ihi =
          std::min(nx_ - 1, static_cast<int>((c[0] + r - x0_) / delta) + 1);
      const int jlo = std::max(0, static_cast<int>((c[1] - r - y0_) / delta));
      const int jhi =
          std::min(ny_ - 1, static_cast<int>((c[1] + r - y0_) / delta) + 1);
      std::uint32_t cursor = cover_offsets_[b];
      for (int j = jlo; j <= jhi; ++j) {
        const double dy = y0_ + j * delta - c[1];
        const double dy2 = dy * dy;
        if (dy2 > r2) continue;
        for (int i = ilo; i <= ihi; ++i) {
          const double dx = x0_ + i * delta - c[0];
          if (dx * dx + dy2 > r2) continue;
          if (pass == 0) {
            ++cover_offsets_[b + 1];
          } else {
            cover_balls_[cursor++] =
                static_cast<std::uint32_t>(j) * nx_ + static_cast<std::uint32_t>(i);
          }
        }
      }
    }
    if (pass == 0) {
      for (std::size_t b = 0; b < centers_.size(); ++b)
        cover_offsets_[b + 1] += cover_offsets_[b];
      cover_balls_.resize(cover_offsets_.back());
    }
  }

  std::vector<std::uint8_t> seen(static_cast<std::size_t>(nx_) * ny_, 0);
  for (std::uint32_t pixel : cover_balls_) {
    if (!seen[pixel]) {
      seen[pixel] = 1;
      filled_.push_back(pixel);
    }
  }
}

ECCurve RasterizedUnion::ecc(const Point& direction,
                             double bounding_radius) const {
  detail::require_unit_direction(direction);
  const double horizon = 2.0 * bounding_radius;

  std::vector<double> heights;
  heights.reserve(centers_.size());
  for (const Point& c : centers_)
    heights.push_back(dot(c, direction) + bounding_radius);
  const auto index = detail::build_sublevel_index(std::move(heights), horizon);

  std::vector<std::uint32_t> order(centers_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&index](std::uint32_t a, std::uint32_t b) {
              return index.slot[a] < index.slot[b];
            });

  // Incremental Euler characteristic of the filled pixel complex: each
  // entering closed pixel contributes its square plus the edges and corners
  // not already present.
  std::vector<std::uint8_t> present(static_cast<std::size_t>(nx_) * ny_, 0);
  std::vector<int> jumps(index.unique_heights.size(), 0);
  auto at = [&](int i, int j) -> bool {
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return false;
    return present[static_cast<std::size_t>(j) * nx_ + i] != 0;
  };
  for (std::uint32_t ball : order) {
    int delta_chi = 0;
    for (std::uint32_t k = cover_offsets_[ball]; k < cover_offsets_[ball + 1];
         ++k) {
      const std::uint32_t pixel = cover_balls_[k];
      if (present[pixel]) continue;
      const int i = static_cast<int>(pixel % nx_);
      const int j = static_cast<int>(pixel / nx_);

      int new_edges = 0;
      if (!at(i - 1, j)) ++new_edges;
      if (!at(i + 1, j)) ++new_edges;
      if (!at(i, j - 1)) ++new_edges;
      if (!at(i, j + 1)) ++new_edges;

      // A corner lattice point is new iff none of the other three pixels
      // around it is present yet.
      int new_corners = 0;
      if (!at(i - 1, j - 1) && !at(i - 1, j) && !at(i, j - 1)) ++new_corners;
      if (!at(i, j - 1) && !at(i + 1, j - 1) && !at(i + 1, j)) ++new_corners;
      if (!at(i - 1, j) && !at(i - 1, j + 1) && !at(i, j + 1)) ++new_corners;
      if (!at(i, j + 1) && !at(i + 1, j) && !at(i + 1, j + 1)) ++new_corners;

      delta_chi += new_corners - new_edges + 1;
      present[pixel] = 1;
    }
    jumps[index.slot[ball]] += delta_chi;
  }

  return detail::curve_from_slot_jumps(horizon, index.unique_heights, jumps);
}

}  // namespace sectkit
