#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sectkit {

/// A point in R^2 or R^3.  Planar data keeps z = 0; the ambient dimension is
/// tracked by the containing shape or grid, not by the point itself.
using Point = std::array<double, 3>;

inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double squared_norm(const Point& a) { return dot(a, a); }

inline double norm(const Point& a) { return std::sqrt(squared_norm(a)); }

inline double squared_distance(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Point& a, const Point& b) {
  return std::sqrt(squared_distance(a, b));
}

struct Ball {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.0;

  bool contains(const Point& p, double slack = 1e-12) const {
    if (radius < 0.0) return false;
    const double r = radius + slack;
    return squared_distance(center, p) <= r * r;
  }
};

/// Minimum enclosing ball of a point set (Welzl's move-to-front algorithm).
/// Exact up to floating point: the ball is determined by at most dim + 1
/// support points.  `dim` must be 2 or 3; for dim == 2 all z coordinates are
/// ignored.  An empty set yields a ball of radius -1.
Ball min_enclosing_ball(std::span<const Point> points, int dim);

/// Same, over a subset of `points` selected by `indices`.
Ball min_enclosing_ball(std::span<const Point> points,
                        std::span<const std::uint32_t> indices, int dim);

/// Reusable Welzl solver; keeps a scratch buffer so repeated queries in hot
/// loops do not allocate.
class MebSolver {
 public:
  explicit MebSolver(int dim) : dim_(dim) {}

  Ball compute(std::span<const Point> points);
  Ball compute(std::span<const Point> points,
               std::span<const std::uint32_t> indices);

 private:
  Ball run();

  int dim_;
  std::vector<const Point*> work_;
};

}  // namespace sectkit
