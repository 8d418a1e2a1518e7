#include "sectkit/geometry.hpp"

#include <algorithm>
#include <limits>

namespace sectkit {
namespace {

constexpr double kContainSlack = 1e-10;

Ball ball_of_one(const Point& a) { return Ball{a, 0.0}; }

Ball ball_of_two(const Point& a, const Point& b) {
  Ball out;
  out.center = {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
  out.radius = 0.5 * distance(a, b);
  return out;
}

// Circumscribed ball of three points, taken in the plane they span (valid in
// both 2 and 3 dimensions).  Falls back to the widest two-point ball when the
// points are (nearly) collinear.
Ball ball_of_three(const Point& a, const Point& b, const Point& c) {
  const Point ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Point ac{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const double abab = dot(ab, ab);
  const double acac = dot(ac, ac);
  const double abac = dot(ab, ac);
  const double det = abab * acac - abac * abac;
  if (det <= 1e-14 * abab * acac || abab == 0.0 || acac == 0.0) {
    Ball best = ball_of_two(a, b);
    const Ball bc = ball_of_two(b, c);
    const Ball ca = ball_of_two(c, a);
    if (bc.radius > best.radius) best = bc;
    if (ca.radius > best.radius) best = ca;
    return best;
  }
  const double s = 0.5 * acac * (abab - abac) / det;
  const double t = 0.5 * abab * (acac - abac) / det;
  Ball out;
  out.center = {a[0] + s * ab[0] + t * ac[0], a[1] + s * ab[1] + t * ac[1],
                a[2] + s * ab[2] + t * ac[2]};
  out.radius = distance(out.center, a);
  return out;
}

// Circumscribed sphere of four points (3D only).  Near-degenerate tetrahedra
// fall back to the smallest facet ball containing the remaining point.
Ball ball_of_four(const Point& a, const Point& b, const Point& c,
                  const Point& d) {
  const Point u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Point v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const Point w{d[0] - a[0], d[1] - a[1], d[2] - a[2]};
  double m[3][3] = {{dot(u, u), dot(u, v), dot(u, w)},
                    {dot(u, v), dot(v, v), dot(v, w)},
                    {dot(u, w), dot(v, w), dot(w, w)}};
  double rhs[3] = {0.5 * m[0][0], 0.5 * m[1][1], 0.5 * m[2][2]};
  const double scale = std::max({m[0][0], m[1][1], m[2][2], 1e-300});

  // Gaussian elimination with partial pivoting on the 3x3 Gram system.
  bool singular = false;
  for (int col = 0; col < 3 && !singular; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      std::swap(rhs[piv], rhs[col]);
    }
    if (std::abs(m[col][col]) <= 1e-12 * scale) {
      singular = true;
      break;
    }
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int k = col; k < 3; ++k) m[r][k] -= f * m[col][k];
      rhs[r] -= f * rhs[col];
    }
  }
  if (singular) {
    const Point* pts[4] = {&a, &b, &c, &d};
    Ball best{{0, 0, 0}, std::numeric_limits<double>::infinity()};
    for (int skip = 0; skip < 4; ++skip) {
      const Point* tri[3];
      int j = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) tri[j++] = pts[i];
      Ball cand = ball_of_three(*tri[0], *tri[1], *tri[2]);
      if (cand.contains(*pts[skip], kContainSlack) && cand.radius < best.radius)
        best = cand;
    }
    if (std::isfinite(best.radius)) return best;
    return ball_of_three(a, b, c);
  }
  double s[3];
  for (int r = 2; r >= 0; --r) {
    double acc = rhs[r];
    for (int k = r + 1; k < 3; ++k) acc -= m[r][k] * s[k];
    s[r] = acc / m[r][r];
  }
  Ball out;
  out.center = {a[0] + s[0] * u[0] + s[1] * v[0] + s[2] * w[0],
                a[1] + s[0] * u[1] + s[1] * v[1] + s[2] * w[1],
                a[2] + s[0] * u[2] + s[1] * v[2] + s[2] * w[2]};
  out.radius = distance(out.center, a);
  return out;
}

Ball ball_of_support(const Point* const* sup, int count) {
  switch (count) {
    case 0:
      return Ball{{0, 0, 0}, -1.0};
    case 1:
      return ball_of_one(*sup[0]);
    case 2:
      return ball_of_two(*sup[0], *sup[1]);
    case 3:
      return ball_of_three(*sup[0], *sup[1], *sup[2]);
    default:
      return ball_of_four(*sup[0], *sup[1], *sup[2], *sup[3]);
  }
}

// Welzl with move-to-front over `pts[0, end)`; `sup` holds forced boundary
// points, at most dim + 1 of them.
Ball welzl(std::vector<const Point*>& pts, std::size_t end,
           const Point* sup[4], int nsup, int dim) {
  Ball ball = ball_of_support(sup, nsup);
  if (nsup == dim + 1) return ball;
  for (std::size_t i = 0; i < end; ++i) {
    const Point* p = pts[i];
    if (!ball.contains(*p, kContainSlack)) {
      sup[nsup] = p;
      ball = welzl(pts, i, sup, nsup + 1, dim);
      for (std::size_t k = i; k > 0; --k) pts[k] = pts[k - 1];
      pts[0] = p;
    }
  }
  return ball;
}

}  // namespace

Ball MebSolver::run() {
  const Point* sup[4] = {nullptr, nullptr, nullptr, nullptr};
  return welzl(work_, work_.size(), sup, 0, dim_);
}

Ball MebSolver::compute(std::span<const Point> points) {
  work_.clear();
  work_.reserve(points.size());
  for (const Point& p : points) work_.push_back(&p);
  return run();
}

Ball MebSolver::compute(std::span<const Point> points,
                        std::span<const std::uint32_t> indices) {
  work_.clear();
  work_.reserve(indices.size());
  for (std::uint32_t i : indices) work_.push_back(&points[i]);
  return run();
}

Ball min_enclosing_ball(std::span<const Point> points, int dim) {
  MebSolver solver(dim);
  return solver.compute(points);
}

Ball min_enclosing_ball(std::span<const Point> points,
                        std::span<const std::uint32_t> indices, int dim) {
  MebSolver solver(dim);
  return solver.compute(points, indices);
}

}  // namespace sectkit
