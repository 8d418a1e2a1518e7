#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sectkit/ecc.hpp"
#include "sectkit/shapes.hpp"

namespace sectkit {

/// Evenly spaced sublevel grid t_q = horizon * q / count for q = 1..count.
struct LevelGrid {
  double horizon = 0.0;
  int count = 0;

  double level(int q) const {  // q is 0-based
    return horizon * static_cast<double>(q + 1) / count;
  }
  std::vector<double> levels() const;
  void validate() const;
  bool operator==(const LevelGrid&) const = default;
};

/// Sampled smooth Euler characteristic transform: one row per direction,
/// one column per level.  Rows produced by sect_from_ecc vanish at t = T up
/// to roundoff.
struct SECTField {
  DirectionGrid grid;
  LevelGrid levels;
  Eigen::MatrixXd values;
  std::string shape_id;
  double bounding_radius = 0.0;

  void validate() const;
};

/// Sampled Euler characteristic transform (integer-valued).
struct ECTField {
  DirectionGrid grid;
  LevelGrid levels;
  Eigen::MatrixXi values;
  std::string shape_id;
  double bounding_radius = 0.0;

  void validate() const;
};

struct FieldPair {
  SECTField sect;
  ECTField ect;
};

/// SECT samples of one curve: F(t_q) - (t_q / T) F(T) with
/// F(t) = integral of the step function on [0, t], evaluated in closed form
/// (no quadrature error).
std::vector<double> sect_from_ecc(const ECCurve& curve, const LevelGrid& levels);

/// Right-continuous evaluation of the curve at each grid level.
std::vector<int> ect_samples(const ECCurve& curve, const LevelGrid& levels);

struct ComputeBackend {
  enum class Kind { mesh, cech_nerve, raster };
  Kind kind = Kind::cech_nerve;
  NerveOptions nerve{};
  double raster_delta = 0.005;
};

/// SECT and ECT fields of a shape over a direction grid.  The per-shape
/// structure (nerve or raster) is built once and shared read-only by the
/// per-direction computations, which run in parallel when threads allow.
FieldPair compute_fields(const ShapeSpec& shape, const DirectionGrid& grid,
                         const LevelGrid& levels, const ComputeBackend& backend,
                         const std::string& shape_id, int threads = 0);

/// Discrete surrogate of the shape metric: sup over directions of the
/// Euclidean norm of the ECT row difference (unscaled sum over levels).
double rho_discrete(const ECTField& a, const ECTField& b);

/// Exact H-norm of the SECT difference of two curves on a shared horizon:
/// the L2 norm of (chi1 - mean(chi1)) - (chi2 - mean(chi2)), integrated in
/// closed form over the merged breakpoints.
double h_norm_diff(const ECCurve& c1, const ECCurve& c2);

}  // namespace sectkit
