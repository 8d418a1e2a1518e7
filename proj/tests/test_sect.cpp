#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sectkit/errors.hpp"
#include "sectkit/random.hpp"
#include "sectkit/sect.hpp"

using namespace sectkit;

TEST_CASE("level grid") {
  const LevelGrid grid{3.0, 50};
  CHECK(grid.level(0) == doctest::Approx(0.06));
  CHECK(grid.level(49) == 3.0);  // exact horizon at the last level
  CHECK_THROWS_AS((LevelGrid{3.0, 1}.validate()), ValidationError);
}

TEST_CASE("sect of a constant curve vanishes") {
  const ECCurve one = ECCurve::from_jumps(2.0, {{0.0, 1}});
  const auto row = sect_from_ecc(one, LevelGrid{2.0, 10});
  for (double v : row) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("sect of a single jump matches the closed form") {
  const double T = 2.0, s = 0.75;
  const ECCurve curve = ECCurve::from_jumps(T, {{s, 1}});
  const LevelGrid grid{T, 16};
  const auto row = sect_from_ecc(curve, grid);
  for (int q = 0; q < grid.count; ++q) {
    const double t = grid.level(q);
    const double expected = std::max(0.0, t - s) - t * (T - s) / T;
    CHECK(row[q] == doctest::Approx(expected).epsilon(1e-14));
  }
  // At t = s the value is -s (T - s) / T.
  const ECCurve curve2 = ECCurve::from_jumps(2.0, {{0.5, 1}});
  const auto row2 = sect_from_ecc(curve2, LevelGrid{2.0, 4});
  CHECK(row2[0] == doctest::Approx(-0.5 * 1.5 / 2.0));
}

TEST_CASE("exact sect agrees with a fine Riemann oracle") {
  RandomStream stream(31415);
  const double T = 3.0;
  const LevelGrid grid{T, 20};
  // Grid-aligned breakpoints with a midpoint-tagged Riemann sum keep the
  // oracle itself exact, isolating the implementation error.
  for (int trial = 0; trial < 100; ++trial) {
    RandomStream ts = stream.child(trial);
    const ECCurve curve = oracles::random_step_curve(ts, T, 12, true, 100000);
    const auto row = sect_from_ecc(curve, grid);
    const auto reference =
        oracles::riemann_sect_grid(curve, grid.levels(), 100000);
    for (int q = 0; q < grid.count; ++q)
      CHECK(std::abs(row[q] - reference[q]) <= 1e-6);
  }
  // Right-endpoint sums (arbitrary breakpoints) converge at rate O(1/N).
  for (int trial = 0; trial < 10; ++trial) {
    RandomStream ts = stream.child(1000 + trial);
    const ECCurve curve = oracles::random_step_curve(ts, T, 8);
    int max_jump = 1;
    for (std::size_t k = 0; k < curve.values.size(); ++k) {
      const int previous = k == 0 ? 0 : curve.values[k - 1];
      max_jump = std::max(max_jump, std::abs(curve.values[k] - previous));
    }
    for (int n : {1000, 10000}) {
      const double tolerance =
          2.0 * T * max_jump * curve.breakpoints.size() / n;
      for (int q = 4; q < grid.count; q += 5) {
        const double reference =
            oracles::riemann_sect(curve, grid.level(q), n);
        CHECK(std::abs(sect_from_ecc(curve, grid)[q] - reference) <=
              tolerance);
      }
    }
  }
}

TEST_CASE("sect is linear in the curve") {
  RandomStream stream(99);
  for (int trial = 0; trial < 20; ++trial) {
    RandomStream ts = stream.child(trial);
    const ECCurve a = oracles::random_step_curve(ts, 3.0, 8);
    const ECCurve b = oracles::random_step_curve(ts, 3.0, 8);
    std::vector<std::pair<double, int>> merged;
    for (std::size_t k = 0; k < a.breakpoints.size(); ++k)
      merged.emplace_back(a.breakpoints[k],
                          a.values[k] - (k ? a.values[k - 1] : 0));
    for (std::size_t k = 0; k < b.breakpoints.size(); ++k)
      merged.emplace_back(b.breakpoints[k],
                          b.values[k] - (k ? b.values[k - 1] : 0));
    const ECCurve sum = ECCurve::from_jumps(3.0, std::move(merged));
    const LevelGrid grid{3.0, 15};
    const auto ra = sect_from_ecc(a, grid);
    const auto rb = sect_from_ecc(b, grid);
    const auto rs = sect_from_ecc(sum, grid);
    for (int q = 0; q < grid.count; ++q)
      CHECK(rs[q] == doctest::Approx(ra[q] + rb[q]).epsilon(1e-12));
  }
}

TEST_CASE("ect sampling is right-continuous") {
  const LevelGrid grid{3.0, 10};
  // Jump exactly at level t_3 = 0.9.
  const ECCurve curve = ECCurve::from_jumps(3.0, {{grid.level(2), 1}});
  const auto row = ect_samples(curve, grid);
  CHECK(row[1] == 0);
  CHECK(row[2] == 1);
  CHECK(row[9] == 1);

  const ECCurve zero = ECCurve::from_jumps(3.0, {});
  for (int v : ect_samples(zero, grid)) CHECK(v == 0);
}

TEST_CASE("horizon mismatch is rejected") {
  const ECCurve curve = ECCurve::from_jumps(3.0, {{1.0, 1}});
  CHECK_THROWS_AS(sect_from_ecc(curve, LevelGrid{2.0, 10}),
                  GridMismatchError);
  CHECK_THROWS_AS(ect_samples(curve, LevelGrid{2.0, 10}), GridMismatchError);
}

TEST_CASE("field computation over a grid") {
  const ShapeSpec k1 = make_deterministic_shape(DeterministicShape::K1, 60);
  const DirectionGrid grid = uniform_circle_grid(4);
  const LevelGrid levels{3.0, 50};
  ComputeBackend backend;
  const FieldPair fields = compute_fields(k1, grid, levels, backend, "K1");
  CHECK(fields.sect.values.rows() == 4);
  CHECK(fields.sect.values.cols() == 50);
  // Endpoint property: the last column vanishes.
  for (int p = 0; p < 4; ++p)
    CHECK(std::abs(fields.sect.values(p, 49)) <= 1e-9);
  // Terminal chi is direction-invariant.
  for (int p = 1; p < 4; ++p)
    CHECK(fields.ect.values(p, 49) == fields.ect.values(0, 49));

  // ECT samples agree with the raster backend almost everywhere.
  ComputeBackend raster;
  raster.kind = ComputeBackend::Kind::raster;
  raster.raster_delta = 0.005;
  const FieldPair oracle = compute_fields(k1, grid, levels, raster, "K1");
  int disagreements = 0;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 50; ++q)
      if (fields.ect.values(p, q) != oracle.ect.values(p, q)) ++disagreements;
  CHECK(disagreements <= 2);
}

TEST_CASE("trivial field shapes") {
  BallUnion one;
  one.dim = 2;
  one.radius = 0.2;
  one.centers = {{0.0, 0.0, 0.0}};
  const ShapeSpec shape{one, 1.0};
  const FieldPair fields = compute_fields(shape, uniform_circle_grid(1),
                                          LevelGrid{2.0, 2}, ComputeBackend{},
                                          "ball");
  CHECK(fields.sect.values.rows() == 1);
  CHECK(fields.sect.values.cols() == 2);
  // One ball entering at t = 1: SECT(1) = 0 - (1/2) * 1 = -0.5, SECT(2) = 0.
  CHECK(fields.sect.values(0, 0) == doctest::Approx(-0.5));
  CHECK(std::abs(fields.sect.values(0, 1)) <= 1e-12);
}

TEST_CASE("rho on ect fields") {
  ECTField a;
  a.grid = uniform_circle_grid(1);
  a.levels = LevelGrid{2.0, 2};
  a.values = Eigen::MatrixXi(1, 2);
  a.values << 0, 0;
  a.shape_id = "a";
  a.bounding_radius = 1.0;
  ECTField b = a;
  CHECK(rho_discrete(a, b) == 0.0);

  b.values << 3, 4;
  CHECK(rho_discrete(a, b) == doctest::Approx(5.0));
  CHECK(rho_discrete(b, a) == doctest::Approx(5.0));

  ECTField c = a;
  c.levels = LevelGrid{2.0, 3};
  c.values = Eigen::MatrixXi::Zero(1, 3);
  CHECK_THROWS_AS(rho_discrete(a, c), GridMismatchError);
}

TEST_CASE("rho is a metric on random fields") {
  RandomStream stream(404);
  const DirectionGrid grid = uniform_circle_grid(3);
  const LevelGrid levels{2.0, 5};
  auto random_field = [&](RandomStream& ts) {
    ECTField f;
    f.grid = grid;
    f.levels = levels;
    f.shape_id = "r";
    f.bounding_radius = 1.0;
    f.values = Eigen::MatrixXi(3, 5);
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 5; ++q)
        f.values(p, q) = static_cast<int>(ts.next_below(7)) - 3;
    return f;
  };
  for (int trial = 0; trial < 50; ++trial) {
    RandomStream ts = stream.child(trial);
    const ECTField x = random_field(ts);
    const ECTField y = random_field(ts);
    const ECTField z = random_field(ts);
    CHECK(rho_discrete(x, y) == doctest::Approx(rho_discrete(y, x)));
    CHECK(rho_discrete(x, y) >= 0.0);
    CHECK(rho_discrete(x, x) == 0.0);
    CHECK(rho_discrete(x, z) <=
          rho_discrete(x, y) + rho_discrete(y, z) + 1e-12);
  }
}

TEST_CASE("h norm of sect differences") {
  const ECCurve zero = ECCurve::from_jumps(2.0, {});
  const ECCurve one = ECCurve::from_jumps(2.0, {{0.0, 1}});
  CHECK(h_norm_diff(zero, zero) == 0.0);
  // Constants are annihilated by centering.
  CHECK(h_norm_diff(one, zero) == doctest::Approx(0.0));

  // Jump at T/2: centered integrand is -1/2 then +1/2.
  const ECCurve half = ECCurve::from_jumps(2.0, {{1.0, 1}});
  CHECK(h_norm_diff(half, zero) == doctest::Approx(std::sqrt(0.5)));

  CHECK_THROWS_AS(
      h_norm_diff(zero, ECCurve::from_jumps(3.0, {})), GridMismatchError);
}
