#include "sectkit/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "sectkit/errors.hpp"

namespace sectkit {
namespace {

constexpr double kFamilyBoundingRadius = 1.5;

template <std::size_t N>
void check_simplex(const std::array<int, N>& simplex, std::size_t vertex_count,
                   const char* what) {
  for (std::size_t a = 0; a < N; ++a) {
    if (simplex[a] < 0 || static_cast<std::size_t>(simplex[a]) >= vertex_count)
      throw ValidationError(std::string(what) + ": vertex index out of range");
    for (std::size_t b = a + 1; b < N; ++b)
      if (simplex[a] == simplex[b])
        throw ValidationError(std::string(what) + ": repeated vertex index");
  }
}

std::array<int, 2> sorted_edge(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

std::array<int, 3> sorted_tri(int a, int b, int c) {
  std::array<int, 3> t{a, b, c};
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

double TriMesh::max_vertex_norm() const {
  double best = 0.0;
  for (const Point& v : vertices) best = std::max(best, norm(v));
  return best;
}

void TriMesh::validate() const {
  if (dim != 2 && dim != 3)
    throw ValidationError("mesh: ambient dimension must be 2 or 3");
  const std::size_t n = vertices.size();
  for (const auto& e : edges) check_simplex(e, n, "edge");
  for (const auto& t : triangles) check_simplex(t, n, "triangle");
  for (const auto& t : tetrahedra) check_simplex(t, n, "tetrahedron");
  if (!tetrahedra.empty() && dim != 3)
    throw ValidationError("mesh: tetrahedra require ambient dimension 3");

  std::set<std::array<int, 2>> edge_set;
  for (const auto& e : edges) edge_set.insert(sorted_edge(e[0], e[1]));
  if (edge_set.size() != edges.size())
    throw ValidationError("mesh: duplicate edge");
  std::set<std::array<int, 3>> tri_set;
  for (const auto& t : triangles) tri_set.insert(sorted_tri(t[0], t[1], t[2]));
  if (tri_set.size() != triangles.size())
    throw ValidationError("mesh: duplicate triangle");

  for (const auto& t : triangles)
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        if (!edge_set.count(sorted_edge(t[a], t[b])))
          throw ValidationError("mesh: triangle with missing edge face");
  for (const auto& t : tetrahedra) {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<int, 3> face;
      int j = 0;
      for (int a = 0; a < 4; ++a)
        if (a != skip) face[j++] = t[a];
      if (!tri_set.count(sorted_tri(face[0], face[1], face[2])))
        throw ValidationError("mesh: tetrahedron with missing triangle face");
    }
  }
}

void BallUnion::validate() const {
  if (dim != 2 && dim != 3)
    throw ValidationError("ball union: ambient dimension must be 2 or 3");
  if (centers.empty()) throw ValidationError("ball union: no centers");
  if (!(radius > 0.0)) throw ValidationError("ball union: radius must be positive");
}

int ShapeSpec::dim() const {
  return is_mesh() ? mesh().dim : balls().dim;
}

void ShapeSpec::validate(double tolerance) const {
  if (!(bounding_radius > 0.0))
    throw ValidationError("shape: bounding radius must be positive");
  double extent = 0.0;
  if (is_mesh()) {
    mesh().validate();
    extent = mesh().max_vertex_norm();
  } else {
    balls().validate();
    for (const Point& c : balls().centers)
      extent = std::max(extent, norm(c));
  }
  if (extent > bounding_radius + tolerance)
    throw ValidationError("shape: not contained in the reference ball");
}

void FamilyParams::validate() const {
  if (!(epsilon >= 0.0)) throw ValidationError("family: epsilon must be >= 0");
  if (!(noise_sd > 0.0)) throw ValidationError("family: noise_sd must be > 0");
  if (curve_points < 3) throw ValidationError("family: curve_points must be >= 3");
  if (!(tube_radius > 0.0))
    throw ValidationError("family: tube_radius must be > 0");
}

TriMesh load_off_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open OFF file: " + path.string());

  auto next_line = [&in](std::string& line) -> bool {
    while (std::getline(in, line)) {
      const std::size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos) continue;
      if (line[start] == '#') continue;
      return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(line)) throw ParseError("empty OFF file: " + path.string());
  {
    std::istringstream header(line);
    std::string magic;
    header >> magic;
    if (magic != "OFF") throw ParseError("missing OFF header: " + path.string());
  }
  if (!next_line(line)) throw ParseError("missing OFF counts line");
  std::size_t nv = 0, nf = 0, ne = 0;
  {
    std::istringstream counts(line);
    if (!(counts >> nv >> nf >> ne))
      throw ParseError("malformed OFF counts line");
  }

  TriMesh mesh;
  mesh.vertices.reserve(nv);
  bool planar = true;
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_line(line)) throw ParseError("OFF file truncated in vertex list");
    std::istringstream row(line);
    double x = 0, y = 0, z = 0;
    if (!(row >> x >> y >> z)) throw ParseError("malformed OFF vertex line");
    if (z != 0.0) planar = false;
    mesh.vertices.push_back(Point{x, y, z});
  }
  mesh.dim = planar ? 2 : 3;

  std::set<std::array<int, 2>> edge_set;
  mesh.triangles.reserve(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    if (!next_line(line)) throw ParseError("OFF file truncated in face list");
    std::istringstream row(line);
    int arity = 0;
    if (!(row >> arity)) throw ParseError("malformed OFF face line");
    if (arity != 3)
      throw ParseError("OFF face is not a triangle (arity " +
                       std::to_string(arity) + ")");
    std::array<int, 3> tri{};
    if (!(row >> tri[0] >> tri[1] >> tri[2]))
      throw ParseError("malformed OFF face line");
    check_simplex(tri, mesh.vertices.size(), "OFF face");
    mesh.triangles.push_back(tri);
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        edge_set.insert(sorted_edge(tri[a], tri[b]));
  }
  mesh.edges.assign(edge_set.begin(), edge_set.end());
  mesh.validate();
  return mesh;
}

ShapeSpec make_shape_spec(TriMesh mesh) {
  const double radius = mesh.max_vertex_norm();
  return make_shape_spec(std::move(mesh), radius);
}

ShapeSpec make_shape_spec(TriMesh mesh, double bounding_radius) {
  ShapeSpec spec{std::move(mesh), bounding_radius};
  spec.validate();
  return spec;
}

namespace {

// Centers along one elliptic arc: (cx + a cos t, b sin t) with t stepping
// from `lo` by span/J, j = 1..J (right endpoint included).
void append_arc(std::vector<Point>& centers, double cx, double a, double b,
                double lo, double span, int count) {
  for (int j = 1; j <= count; ++j) {
    const double t = lo + span * static_cast<double>(j) / count;
    centers.push_back(Point{cx + a * std::cos(t), b * std::sin(t), 0.0});
  }
}

ShapeSpec two_arc_shape(double first_lo, double first_span, double a1,
                        double b1, double a2, double b2, int curve_points,
                        double tube_radius) {
  constexpr double pi = std::numbers::pi;
  BallUnion balls;
  balls.dim = 2;
  balls.radius = tube_radius;
  balls.centers.reserve(2 * static_cast<std::size_t>(curve_points));
  append_arc(balls.centers, 0.4, a1, b1, first_lo, first_span, curve_points);
  append_arc(balls.centers, -0.4, a2, b2, 6.0 * pi / 5.0, 8.0 * pi / 5.0,
             curve_points);
  ShapeSpec spec{std::move(balls), kFamilyBoundingRadius};
  spec.validate();
  return spec;
}

}  // namespace

ShapeSpec make_deterministic_shape(DeterministicShape which, int curve_points) {
  if (curve_points < 3)
    throw ValidationError("deterministic shape: curve_points must be >= 3");
  constexpr double pi = std::numbers::pi;
  if (which == DeterministicShape::K1)
    return two_arc_shape(pi / 5.0, 8.0 * pi / 5.0, 1.0, 1.0, 1.0, 1.0,
                         curve_points, 0.2);
  return two_arc_shape(0.0, 2.0 * pi, 1.0, 1.0, 1.0, 1.0, curve_points, 0.2);
}

ShapeSpec sample_random_shape(const FamilyParams& params, RandomStream& stream) {
  params.validate();
  constexpr double pi = std::numbers::pi;
  const double a1 = stream.next_normal(1.0, params.noise_sd);
  const double a2 = stream.next_normal(1.0, params.noise_sd);
  const double b1 = stream.next_normal(1.0, params.noise_sd);
  const double b2 = stream.next_normal(1.0, params.noise_sd);
  const double lo = (1.0 - params.epsilon) * pi / 5.0;
  const double hi = (9.0 + params.epsilon) * pi / 5.0;
  return two_arc_shape(lo, hi - lo, a1, b1, a2, b2, params.curve_points,
                       params.tube_radius);
}

std::string shape_kind_name(const ShapeSpec& shape) {
  return shape.is_mesh() ? "mesh" : "ball_union";
}

}  // namespace sectkit
