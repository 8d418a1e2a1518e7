#include "sectkit/sect.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>

#include "sectkit/errors.hpp"
#include "sectkit/parallel.hpp"

namespace sectkit {
namespace {

void require_matching_horizon(double a, double b, const char* what) {
  if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
    throw GridMismatchError(std::string(what) + ": horizon mismatch");
}

// Exact antiderivative F(t) of the step function, evaluated at ascending
// query points.
class StepIntegral {
 public:
  explicit StepIntegral(const ECCurve& curve) : curve_(curve) {
    partial_.reserve(curve.breakpoints.size());
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < curve.breakpoints.size(); ++k) {
      acc += curve_.values[k] * (curve_.breakpoints[k + 1] - curve_.breakpoints[k]);
      partial_.push_back(acc);
    }
  }

  double at(double t) const {
    const auto& b = curve_.breakpoints;
    if (b.empty() || t <= b.front()) return 0.0;
    const auto it = std::upper_bound(b.begin(), b.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - b.begin()) - 1;
    const double before = (k == 0) ? 0.0 : partial_[k - 1];
    return before + curve_.values[k] * (t - b[k]);
  }

  double total() const { return at(curve_.horizon); }

 private:
  const ECCurve& curve_;
  std::vector<double> partial_;  // integral up to breakpoint k+1
};

}  // namespace

std::vector<double> LevelGrid::levels() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int q = 0; q < count; ++q) out[static_cast<std::size_t>(q)] = level(q);
  return out;
}

void LevelGrid::validate() const {
  if (count < 2) throw ValidationError("level grid: need at least 2 levels");
  if (!(horizon > 0.0))
    throw ValidationError("level grid: horizon must be positive");
}

void SECTField::validate() const {
  grid.validate();
  levels.validate();
  if (values.rows() != static_cast<Eigen::Index>(grid.size()) ||
      values.cols() != levels.count)
    throw ValidationError("sect field: value array shape mismatch");
  if (!values.allFinite())
    throw ValidationError("sect field: non-finite entries");
}

void ECTField::validate() const {
  grid.validate();
  levels.validate();
  if (values.rows() != static_cast<Eigen::Index>(grid.size()) ||
      values.cols() != levels.count)
    throw ValidationError("ect field: value array shape mismatch");
}

std::vector<double> sect_from_ecc(const ECCurve& curve,
                                  const LevelGrid& levels) {
  require_matching_horizon(curve.horizon, levels.horizon, "sect_from_ecc");
  const StepIntegral integral(curve);
  const double total = integral.at(curve.horizon);
  std::vector<double> out(static_cast<std::size_t>(levels.count));
  for (int q = 0; q < levels.count; ++q) {
    const double t = std::min(levels.level(q), curve.horizon);
    out[static_cast<std::size_t>(q)] =
        integral.at(t) - (t / curve.horizon) * total;
  }
  return out;
}

std::vector<int> ect_samples(const ECCurve& curve, const LevelGrid& levels) {
  require_matching_horizon(curve.horizon, levels.horizon, "ect_samples");
  std::vector<int> out(static_cast<std::size_t>(levels.count));
  for (int q = 0; q < levels.count; ++q)
    out[static_cast<std::size_t>(q)] = curve.value_at(levels.level(q));
  return out;
}

FieldPair compute_fields(const ShapeSpec& shape, const DirectionGrid& grid,
                         const LevelGrid& levels, const ComputeBackend& backend,
                         const std::string& shape_id, int threads) {
  shape.validate();
  grid.validate();
  levels.validate();
  if (grid.dim != shape.dim())
    throw GridMismatchError("compute_fields: direction/shape dimension mismatch");
  require_matching_horizon(levels.horizon, 2.0 * shape.bounding_radius,
                           "compute_fields");

  const auto gamma = static_cast<Eigen::Index>(grid.size());
  FieldPair out;
  out.sect = SECTField{grid, levels, Eigen::MatrixXd(gamma, levels.count),
                       shape_id, shape.bounding_radius};
  out.ect = ECTField{grid, levels, Eigen::MatrixXi(gamma, levels.count),
                     shape_id, shape.bounding_radius};

  std::function<ECCurve(const Point&)> curve_of;
  std::unique_ptr<BallNerve> nerve;
  std::unique_ptr<PlanarUnionFiltration> planar;
  std::unique_ptr<RasterizedUnion> raster;
  const double radius = shape.bounding_radius;
  switch (backend.kind) {
    case ComputeBackend::Kind::mesh:
      if (!shape.is_mesh())
        throw ValidationError("mesh backend requires a mesh shape");
      curve_of = [&shape, radius](const Point& d) {
        return ecc_mesh(shape.mesh(), d, radius);
      };
      break;
    case ComputeBackend::Kind::cech_nerve:
      if (shape.is_mesh())
        throw ValidationError("cech backend requires a ball union");
      if (shape.dim() == 2) {
        planar = std::make_unique<PlanarUnionFiltration>(shape.balls());
        curve_of = [&planar, radius](const Point& d) {
          return planar->ecc(d, radius);
        };
      } else {
        nerve = std::make_unique<BallNerve>(shape.balls(), backend.nerve);
        curve_of = [&nerve, radius](const Point& d) {
          return nerve->ecc(d, radius);
        };
      }
      break;
    case ComputeBackend::Kind::raster:
      if (shape.is_mesh())
        throw ValidationError("raster backend requires a ball union");
      raster = std::make_unique<RasterizedUnion>(shape.balls(),
                                                 backend.raster_delta);
      curve_of = [&raster, radius](const Point& d) {
        return raster->ecc(d, radius);
      };
      break;
  }

  parallel_for(
      grid.size(),
      [&](std::size_t p) {
        const ECCurve curve = curve_of(grid.directions[p]);
        const auto sect_row = sect_from_ecc(curve, levels);
        const auto ect_row = ect_samples(curve, levels);
        for (int q = 0; q < levels.count; ++q) {
          out.sect.values(static_cast<Eigen::Index>(p), q) =
              sect_row[static_cast<std::size_t>(q)];
          out.ect.values(static_cast<Eigen::Index>(p), q) =
              ect_row[static_cast<std::size_t>(q)];
        }
      },
      threads);

  return out;
}

double rho_discrete(const ECTField& a, const ECTField& b) {
  if (a.grid != b.grid || !(a.levels == b.levels))
    throw GridMismatchError("rho: fields on different grids");
  double best = 0.0;
  for (Eigen::Index p = 0; p < a.values.rows(); ++p) {
    const double row =
        (a.values.row(p) - b.values.row(p)).cast<double>().norm();
    best = std::max(best, row);
  }
  return best;
}

double h_norm_diff(const ECCurve& c1, const ECCurve& c2) {
  require_matching_horizon(c1.horizon, c2.horizon, "h_norm_diff");
  const double horizon = c1.horizon;
  const StepIntegral i1(c1), i2(c2);
  const double m1 = i1.total() / horizon;
  const double m2 = i2.total() / horizon;

  // Walk the merged breakpoints; the integrand is constant between them.
  std::vector<double> cuts;
  cuts.reserve(c1.breakpoints.size() + c2.breakpoints.size() + 2);
  cuts.push_back(0.0);
  cuts.insert(cuts.end(), c1.breakpoints.begin(), c1.breakpoints.end());
  cuts.insert(cuts.end(), c2.breakpoints.begin(), c2.breakpoints.end());
  cuts.push_back(horizon);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= 0.0) continue;
    const double g =
        (c1.value_at(cuts[k]) - m1) - (c2.value_at(cuts[k]) - m2);
    acc += g * g * len;
  }
  return std::sqrt(acc);
}

}  // namespace sectkit
