#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sectkit/geometry.hpp"
#include "sectkit/shapes.hpp"

namespace sectkit {

/// Euler characteristic curve: a right-continuous integer step function on
/// [0, horizon].  The value is `values[k]` on [breakpoints[k],
/// breakpoints[k+1]) and 0 before the first breakpoint.  Breakpoints are
/// strictly increasing and consecutive values differ.
struct ECCurve {
  double horizon = 0.0;
  std::vector<double> breakpoints;
  std::vector<int> values;

  int value_at(double t) const;
  int terminal_value() const { return values.empty() ? 0 : values.back(); }
  int max_abs_value() const;
  void validate() const;

  /// Builds a curve from (position, jump) events: sorts, merges ties, drops
  /// zero net jumps.  Positions are clamped into [0, horizon] when they are
  /// within `tolerance` of the interval, else a ValidationError is thrown.
  static ECCurve from_jumps(double horizon,
                            std::vector<std::pair<double, int>> events,
                            double tolerance = 1e-9);
};

/// sup_t |chi_t| <= bound?
bool ecc_bounds_check(const ECCurve& curve, double bound);

/// Ordered unit directions on the circle or sphere.
struct DirectionGrid {
  int dim = 2;
  std::vector<Point> directions;

  std::size_t size() const { return directions.size(); }
  void validate() const;  // each direction unit within 1e-12
  bool operator==(const DirectionGrid&) const = default;
};

/// Directions at angles (p - 1) * step for p = 1..count.
DirectionGrid step_grid(int count, double step_radians);

/// Uniform directions on the circle: angles (p - 1) * 2 pi / count.
DirectionGrid uniform_circle_grid(int count);

/// Reads a CSV of unit vectors, one per row, `dim` columns.  Rows within
/// 1e-6 of unit norm are renormalized; anything further off is rejected.
DirectionGrid direction_grid_from_file(const std::filesystem::path& path,
                                       int dim);

/// Exact ECC of a simplicial complex under the sublevel filtration with
/// heights v . direction + bounding_radius.  Every simplex enters at the
/// maximum height of its vertices (lower-star convention); simplices entering
/// at the same height merge into a single breakpoint.
ECCurve ecc_mesh(const TriMesh& mesh, const Point& direction,
                 double bounding_radius);

struct NerveOptions {
  /// Hard cap on simplex vertex count; enumeration requiring a larger
  /// simplex raises ResourceError with guidance to use the raster backend.
  int max_simplex_vertices = 24;
};

/// Cech nerve of an equal-radius ball union: a subset of centers spans a
/// simplex iff the minimum enclosing ball of the centers has radius at most
/// the common ball radius (for equal radii this characterizes a nonempty
/// common intersection).  Built once per shape via DFS over the intersection
/// graph with MEB pruning; afterwards per-direction curves share it
/// read-only, so they may be computed concurrently.
class BallNerve {
 public:
  explicit BallNerve(const BallUnion& balls, NerveOptions options = {});

  /// ECC in one direction: every nerve simplex enters at the maximum of
  /// center . direction + bounding_radius over its members.
  ECCurve ecc(const Point& direction, double bounding_radius) const;

  std::size_t simplex_count() const { return offsets_.size() - 1; }
  int max_dimension() const { return max_dimension_; }

 private:
  int dim_ = 2;
  double radius_ = 0.0;
  int max_dimension_ = 0;
  std::vector<Point> centers_;
  std::vector<std::uint32_t> members_;  // flattened, ascending per simplex
  std::vector<std::uint32_t> offsets_;  // simplex_count() + 1 entries
};

/// Exact sublevel ECC of a planar equal-radius ball union, computed without
/// enumerating the nerve.  When ball i enters the filtration, the Euler
/// characteristic jumps by 1 - chi(B_i intersected with the union of earlier
/// balls); that intersection is a union of convex lenses, so its chi equals
/// beta0 - beta1 of the lens nerve, and H1 of a complex depends only on its
/// 2-skeleton.  Everything therefore reduces to pairwise, triple, and
/// quadruple common-intersection tables (minimum-enclosing-ball tests),
/// built once per shape and shared read-only across directions.  Produces
/// the same curves as BallNerve::ecc.
class PlanarUnionFiltration {
 public:
  explicit PlanarUnionFiltration(const BallUnion& balls);

  ECCurve ecc(const Point& direction, double bounding_radius) const;

 private:
  struct CenterTables {
    std::vector<std::uint32_t> neighbors;  // global center ids
    std::vector<std::uint64_t> pair_bits;  // local KxK triple-test matrix
    std::vector<std::array<std::uint16_t, 3>> triangles;  // local, quad test
    std::size_t words = 0;
  };

  double radius_ = 0.0;
  std::vector<Point> centers_;
  std::vector<CenterTables> tables_;
};

/// Rasterization of a planar ball union onto a pixel grid of spacing delta.
/// A pixel belongs to the sublevel set at t iff some ball covers its center
/// and that ball's center height is at most t; the curve counts vertices,
/// edges, and squares of the filled pixel complex.  This is the approximation
/// backend used as an independent cross-check of the nerve, not the primary
/// route.
class RasterizedUnion {
 public:
  RasterizedUnion(const BallUnion& balls, double delta);

  ECCurve ecc(const Point& direction, double bounding_radius) const;

  std::size_t filled_pixel_count() const { return filled_.size(); }

 private:
  double delta_ = 0.0;
  int nx_ = 0, ny_ = 0;
  double x0_ = 0.0, y0_ = 0.0;  // coordinates of pixel (0, 0) center
  std::vector<Point> centers_;
  std::vector<std::uint32_t> filled_;         // linear pixel indices
  std::vector<std::uint32_t> cover_offsets_;  // per filled pixel
  std::vector<std::uint32_t> cover_balls_;
};

enum class BallBackend { cech_nerve, raster };

/// One-shot ECC of a ball union.  For many directions over the same shape
/// prefer constructing BallNerve / RasterizedUnion once.
ECCurve ecc_ball_union(const BallUnion& balls, const Point& direction,
                       double bounding_radius, BallBackend backend,
                       double raster_delta = 0.005, NerveOptions options = {});

}  // namespace sectkit
