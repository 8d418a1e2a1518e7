#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "sectkit/geometry.hpp"
#include "sectkit/random.hpp"

namespace sectkit {

/// A finite simplicial complex embedded in R^2 or R^3.  Simplices are stored
/// per dimension; every face of a listed simplex must be listed as well
/// (closed complex), which validate() enforces.
struct TriMesh {
  int dim = 3;  // ambient dimension, 2 or 3
  std::vector<Point> vertices;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 4>> tetrahedra;

  double max_vertex_norm() const;
  std::size_t simplex_count() const {
    return vertices.size() + edges.size() + triangles.size() +
           tetrahedra.size();
  }
  /// Throws ValidationError on out-of-range or repeated indices, missing
  /// faces, or an ambient dimension outside {2, 3}.
  void validate() const;
};

/// Union of equal-radius closed balls.
struct BallUnion {
  int dim = 2;
  std::vector<Point> centers;
  double radius = 0.0;

  void validate() const;
};

/// A shape together with the radius R of the reference ball B(0, R) used by
/// the sublevel filtration (filtration horizon T = 2R).
///
/// Containment is enforced on vertices and ball centers: the filtration
/// heights x . nu + R land in [0, 2R] exactly when every vertex/center has
/// norm at most R.  Ball bodies may overhang B(0, R) slightly; entry times
/// are gated by centers, so the overhang never produces out-of-range heights.
struct ShapeSpec {
  std::variant<TriMesh, BallUnion> body;
  double bounding_radius = 0.0;

  int dim() const;
  bool is_mesh() const { return std::holds_alternative<TriMesh>(body); }
  const TriMesh& mesh() const { return std::get<TriMesh>(body); }
  const BallUnion& balls() const { return std::get<BallUnion>(body); }

  /// Throws ValidationError if a vertex/center norm exceeds
  /// bounding_radius + tolerance.
  void validate(double tolerance = 1e-9) const;
};

/// Parameters of the two-arc random shape family.
struct FamilyParams {
  double epsilon = 0.0;     // arc extension of the first arc
  double noise_sd = 0.05;   // amplitude noise, N(1, noise_sd^2)
  int curve_points = 100;   // J, ball centers per arc
  double tube_radius = 0.2;

  void validate() const;  // epsilon >= 0, noise_sd > 0, J >= 3, radius > 0
};

enum class DeterministicShape { K1, K2 };

/// Reads an ASCII OFF file with triangular faces.  Edges are derived from
/// the faces and deduplicated, so the result is a closed complex.  The
/// ambient dimension is 2 when every z coordinate is zero, else 3.
TriMesh load_off_mesh(const std::filesystem::path& path);

/// Wraps a mesh in a ShapeSpec.  Without an explicit radius the bounding
/// radius is the maximum vertex norm.
ShapeSpec make_shape_spec(TriMesh mesh);
ShapeSpec make_shape_spec(TriMesh mesh, double bounding_radius);

/// The two reference shapes: tubes of radius 1/5 around a pair of circular
/// arcs, discretized as a ball union with `curve_points` centers per arc.
/// Bounding radius is fixed at 3/2 (filtration horizon T = 3).
ShapeSpec make_deterministic_shape(DeterministicShape which, int curve_points);

/// One draw from the random family: amplitudes a1, a2, b1, b2 ~ N(1, sd^2)
/// taken from `stream`, arcs perturbed by epsilon.  With epsilon = 0 and
/// sd -> 0 the centers converge to make_deterministic_shape(K1, J).
ShapeSpec sample_random_shape(const FamilyParams& params, RandomStream& stream);

std::string shape_kind_name(const ShapeSpec& shape);

}  // namespace sectkit
