#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sectkit/ecc.hpp"
#include "sectkit/errors.hpp"
#include "sectkit/random.hpp"
#include "sectkit/shapes.hpp"

using namespace sectkit;

namespace {

TriMesh single_triangle() {
  TriMesh mesh;
  mesh.dim = 2;
  mesh.vertices = {{-0.5, -0.2, 0}, {0.5, -0.1, 0}, {0.0, 0.6, 0}};
  mesh.edges = {{0, 1}, {0, 2}, {1, 2}};
  mesh.triangles = {{0, 1, 2}};
  return mesh;
}

Point angle_dir(double theta) {
  return Point{std::cos(theta), std::sin(theta), 0.0};
}

// Evaluation levels that avoid breakpoints of both curves.
std::vector<double> probe_levels(const ECCurve& a, const ECCurve& b) {
  std::vector<double> cuts{0.0, a.horizon};
  cuts.insert(cuts.end(), a.breakpoints.begin(), a.breakpoints.end());
  cuts.insert(cuts.end(), b.breakpoints.begin(), b.breakpoints.end());
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> probes;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    if (cuts[k + 1] > cuts[k])
      probes.push_back(0.5 * (cuts[k] + cuts[k + 1]));
  probes.push_back(a.horizon);
  return probes;
}

}  // namespace

TEST_CASE("direction grids") {
  const DirectionGrid quarters = uniform_circle_grid(4);
  CHECK(quarters.directions[0][0] == doctest::Approx(1.0));
  CHECK(quarters.directions[1][1] == doctest::Approx(1.0));
  CHECK(quarters.directions[2][0] == doctest::Approx(-1.0));
  CHECK(quarters.directions[3][1] == doctest::Approx(-1.0));
  CHECK(uniform_circle_grid(1).size() == 1);
  CHECK_THROWS_AS(uniform_circle_grid(0), ValidationError);
}

TEST_CASE("curve container invariants") {
  ECCurve curve = ECCurve::from_jumps(3.0, {{1.0, 1}, {2.0, -1}, {1.0, 1}});
  CHECK(curve.breakpoints == std::vector<double>{1.0, 2.0});
  CHECK(curve.values == std::vector<int>{2, 1});
  CHECK(curve.value_at(0.5) == 0);
  CHECK(curve.value_at(1.0) == 2);  // right continuity
  CHECK(curve.value_at(2.5) == 1);
  CHECK_NOTHROW(curve.validate());

  // Cancelling jumps disappear entirely.
  const ECCurve flat = ECCurve::from_jumps(3.0, {{1.0, 1}, {1.0, -1}});
  CHECK(flat.breakpoints.empty());
  CHECK(flat.terminal_value() == 0);

  CHECK_THROWS_AS(ECCurve::from_jumps(3.0, {{4.0, 1}}), ValidationError);
}

TEST_CASE("bounds check") {
  const ECCurve one = ECCurve::from_jumps(3.0, {{0.5, 1}});
  CHECK(ecc_bounds_check(one, 1.0));
  const ECCurve deep = ECCurve::from_jumps(3.0, {{0.5, -3}});
  CHECK_FALSE(ecc_bounds_check(deep, 2.0));
  CHECK_THROWS_AS(ecc_bounds_check(one, 0.0), ValidationError);
}

TEST_CASE("mesh curve on a single triangle") {
  const TriMesh mesh = single_triangle();
  const ECCurve curve = ecc_mesh(mesh, angle_dir(0.3), 1.0);
  // chi jumps to 1 at the first vertex and stays 1 throughout.
  CHECK(curve.breakpoints.size() == 1);
  CHECK(curve.values == std::vector<int>{1});
  CHECK(curve.value_at(0.0) == 0);
  CHECK(curve.terminal_value() == 1);
}

TEST_CASE("mesh curve on two disjoint triangles") {
  TriMesh mesh = single_triangle();
  const int base = 3;
  for (const Point& v : std::vector<Point>{{2.0, 2.0, 0}, {2.8, 2.1, 0},
                                           {2.3, 2.7, 0}})
    mesh.vertices.push_back(v);
  mesh.edges.push_back({base + 0, base + 1});
  mesh.edges.push_back({base + 0, base + 2});
  mesh.edges.push_back({base + 1, base + 2});
  mesh.triangles.push_back({base + 0, base + 1, base + 2});
  const ECCurve curve = ecc_mesh(mesh, angle_dir(1.1), 4.0);
  CHECK(curve.terminal_value() == 2);
}

TEST_CASE("tetrahedron boundary has the Euler characteristic of a sphere") {
  TriMesh mesh;
  mesh.dim = 3;
  mesh.vertices = {{0.4, 0.4, 0.4},
                   {0.4, -0.4, -0.4},
                   {-0.4, 0.4, -0.4},
                   {-0.4, -0.4, 0.4}};
  mesh.edges = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  mesh.triangles = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (double theta : {0.0, 0.7, 2.1}) {
    const ECCurve curve = ecc_mesh(mesh, angle_dir(theta), 1.0);
    CHECK(curve.terminal_value() == 2);
    CHECK(curve.value_at(0.0) == 0);
  }
}

TEST_CASE("mesh curves match the brute-force simplex count everywhere") {
  RandomStream stream(2024);
  for (int trial = 0; trial < 50; ++trial) {
    RandomStream ts = stream.child(trial);
    const TriMesh mesh = oracles::random_mesh(ts, 30, trial % 2 == 0);
    const double theta = ts.next_uniform() * 2 * std::numbers::pi;
    const double phi = ts.next_uniform() * std::numbers::pi;
    const Point dir{std::cos(theta) * std::sin(phi),
                    std::sin(theta) * std::sin(phi), std::cos(phi)};
    const ECCurve curve = ecc_mesh(mesh, dir, 1.0);
    curve.validate();
    // Probe at breakpoints, just before, between, and at the horizon.
    std::vector<double> probes{0.0, curve.horizon};
    for (double b : curve.breakpoints) {
      probes.push_back(b);
      probes.push_back(b - 1e-9);
      probes.push_back(b + 1e-9);
    }
    for (double t : probes) {
      if (t < 0.0 || t > curve.horizon) continue;
      CHECK(curve.value_at(t) == oracles::brute_mesh_chi(mesh, dir, 1.0, t));
    }
  }
}

TEST_CASE("rotating mesh and direction together leaves the curve unchanged") {
  RandomStream stream(77);
  for (int trial = 0; trial < 10; ++trial) {
    RandomStream ts = stream.child(trial);
    const TriMesh mesh = oracles::random_mesh(ts, 16, false);
    const double angle = ts.next_uniform() * 2 * std::numbers::pi;
    const double c = std::cos(angle), s = std::sin(angle);
    TriMesh rotated = mesh;
    for (Point& v : rotated.vertices)
      v = Point{c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]};
    const Point dir = angle_dir(0.37);
    const Point rotated_dir{c * dir[0] - s * dir[1], s * dir[0] + c * dir[1],
                            0.0};
    const ECCurve a = ecc_mesh(mesh, dir, 1.0);
    const ECCurve b = ecc_mesh(rotated, rotated_dir, 1.0);
    for (double t : probe_levels(a, b)) CHECK(a.value_at(t) == b.value_at(t));
  }
}

TEST_CASE("mesh containment error") {
  const TriMesh mesh = single_triangle();
  CHECK_THROWS_AS(ecc_mesh(mesh, angle_dir(0.0), 0.3), ValidationError);
  CHECK_THROWS_AS(ecc_mesh(mesh, Point{2.0, 0.0, 0.0}, 1.0), ValidationError);
}

TEST_CASE("nerve of one and two balls") {
  BallUnion one;
  one.dim = 2;
  one.radius = 0.2;
  one.centers = {{0.3, -0.1, 0}};
  const ECCurve c1 = ecc_ball_union(one, angle_dir(0.0), 1.0,
                                    BallBackend::cech_nerve);
  CHECK(c1.breakpoints.size() == 1);
  CHECK(c1.breakpoints[0] == doctest::Approx(1.3));
  CHECK(c1.values == std::vector<int>{1});

  BallUnion two = one;
  two.centers.push_back({0.5, -0.1, 0});  // overlapping pair
  const ECCurve c2 = ecc_ball_union(two, angle_dir(0.0), 1.0,
                                    BallBackend::cech_nerve);
  CHECK(c2.terminal_value() == 1);

  BallNerve nerve(two);
  CHECK(nerve.simplex_count() == 3);  // 2 vertices + 1 edge
  CHECK(nerve.max_dimension() == 1);
}

TEST_CASE("nerve vertex cap raises a resource error") {
  BallUnion cluster;
  cluster.dim = 2;
  cluster.radius = 0.5;
  for (int i = 0; i < 6; ++i)
    cluster.centers.push_back({0.01 * i, 0.0, 0.0});
  NerveOptions options;
  options.max_simplex_vertices = 3;
  CHECK_THROWS_AS(BallNerve(cluster, options), ResourceError);
}

TEST_CASE("planar filtration and enumerated nerve agree exactly") {
  RandomStream stream(5150);
  NerveOptions options;
  options.max_simplex_vertices = 64;
  for (int trial = 0; trial < 40; ++trial) {
    RandomStream ts = stream.child(trial);
    BallUnion u;
    u.dim = 2;
    u.radius = 0.12 + 0.15 * ts.next_uniform();
    const int m = 3 + static_cast<int>(ts.next_below(12));
    for (int i = 0; i < m; ++i)
      u.centers.push_back(Point{0.8 * (ts.next_uniform() - 0.5),
                                0.8 * (ts.next_uniform() - 0.5), 0.0});
    const PlanarUnionFiltration fast(u);
    const BallNerve nerve(u, options);
    for (int p = 0; p < 4; ++p) {
      const Point d = angle_dir(ts.next_uniform() * 2 * std::numbers::pi);
      const ECCurve a = fast.ecc(d, 1.0);
      const ECCurve b = nerve.ecc(d, 1.0);
      REQUIRE(a.breakpoints.size() == b.breakpoints.size());
      for (std::size_t k = 0; k < a.breakpoints.size(); ++k) {
        CHECK(a.breakpoints[k] == b.breakpoints[k]);
        CHECK(a.values[k] == b.values[k]);
      }
    }
  }
}

TEST_CASE("K1 terminal Euler characteristic is 0 and K2 is -1") {
  // Independent raster oracle at delta = 0.005 fixes the expected values;
  // both backends must produce them.
  const ShapeSpec k1 = make_deterministic_shape(DeterministicShape::K1, 100);
  const ShapeSpec k2 = make_deterministic_shape(DeterministicShape::K2, 100);
  const Point dir = angle_dir(0.0);

  const ECCurve k1_nerve = ecc_ball_union(k1.balls(), dir, 1.5,
                                          BallBackend::cech_nerve);
  const ECCurve k1_raster =
      ecc_ball_union(k1.balls(), dir, 1.5, BallBackend::raster, 0.005);
  CHECK(k1_nerve.terminal_value() == 0);
  CHECK(k1_raster.terminal_value() == 0);
  CHECK(k1_nerve.value_at(0.0) == 0);

  const ECCurve k2_nerve = ecc_ball_union(k2.balls(), dir, 1.5,
                                          BallBackend::cech_nerve);
  const ECCurve k2_raster =
      ecc_ball_union(k2.balls(), dir, 1.5, BallBackend::raster, 0.005);
  CHECK(k2_nerve.terminal_value() == -1);
  CHECK(k2_raster.terminal_value() == -1);
}

TEST_CASE("K1 curves stay within the Euler characteristic bound") {
  const ShapeSpec k1 = make_deterministic_shape(DeterministicShape::K1, 100);
  const PlanarUnionFiltration filtration(k1.balls());
  for (int p = 0; p < 4; ++p) {
    const ECCurve curve =
        filtration.ecc(angle_dir(p * std::numbers::pi / 4.0), 1.5);
    CHECK(ecc_bounds_check(curve, 10.0));
  }
}

TEST_CASE("backends agree at sampled levels away from breakpoints") {
  const ShapeSpec k1 = make_deterministic_shape(DeterministicShape::K1, 100);
  const PlanarUnionFiltration nerve(k1.balls());
  const RasterizedUnion raster(k1.balls(), 0.005);
  int agree = 0, total = 0;
  for (int p = 0; p < 2; ++p) {
    const Point d = angle_dir(0.4 + p * 1.9);
    const ECCurve a = nerve.ecc(d, 1.5);
    const ECCurve b = raster.ecc(d, 1.5);
    for (int q = 1; q <= 25; ++q) {
      const double t = 3.0 * q / 25;
      ++total;
      if (a.value_at(t) == b.value_at(t)) ++agree;
    }
  }
  CHECK(agree >= total - 1);
}

TEST_CASE("direction file round trip and validation") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "dirs.csv";
  {
    std::ofstream out(path);
    out << "1,0\n0.70710678118654752,0.70710678118654746\n0,1\n";
  }
  const DirectionGrid grid = direction_grid_from_file(path, 2);
  CHECK(grid.size() == 3);
  for (const Point& d : grid.directions)
    CHECK(norm(d) == doctest::Approx(1.0).epsilon(1e-14));

  const auto bad = fs::temp_directory_path() / "bad_dirs.csv";
  {
    std::ofstream out(bad);
    out << "1,0\n0.5,0.5\n";
  }
  CHECK_THROWS_AS(direction_grid_from_file(bad, 2), ValidationError);
}
