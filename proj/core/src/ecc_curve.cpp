#include "sectkit/ecc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sectkit/errors.hpp"

namespace sectkit {

int ECCurve::value_at(double t) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  if (it == breakpoints.begin()) return 0;
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

int ECCurve::max_abs_value() const {
  int best = 0;
  for (int v : values) best = std::max(best, std::abs(v));
  return best;
}

void ECCurve::validate() const {
  if (!(horizon > 0.0)) throw ValidationError("ecc: horizon must be positive");
  if (breakpoints.size() != values.size())
    throw ValidationError("ecc: breakpoint/value size mismatch");
  int previous = 0;
  for (std::size_t k = 0; k < breakpoints.size(); ++k) {
    if (breakpoints[k] < 0.0 || breakpoints[k] > horizon)
      throw ValidationError("ecc: breakpoint outside [0, horizon]");
    if (k > 0 && !(breakpoints[k] > breakpoints[k - 1]))
      throw ValidationError("ecc: breakpoints not strictly increasing");
    if (values[k] == previous)
      throw ValidationError("ecc: redundant breakpoint (no value change)");
    previous = values[k];
  }
}

ECCurve ECCurve::from_jumps(double horizon,
                            std::vector<std::pair<double, int>> events,
                            double tolerance) {
  ECCurve curve;
  curve.horizon = horizon;
  for (auto& [position, jump] : events) {
    if (position < -tolerance || position > horizon + tolerance)
      throw ValidationError("ecc: jump position outside [0, horizon]");
    position = std::clamp(position, 0.0, horizon);
  }
  std::sort(events.begin(), events.end());
  int value = 0;
  std::size_t k = 0;
  while (k < events.size()) {
    const double position = events[k].first;
    int jump = 0;
    while (k < events.size() && events[k].first == position) {
      jump += events[k].second;
      ++k;
    }
    if (jump == 0) continue;
    value += jump;
    curve.breakpoints.push_back(position);
    curve.values.push_back(value);
  }
  return curve;
}

bool ecc_bounds_check(const ECCurve& curve, double bound) {
  if (!(bound > 0.0)) throw ValidationError("bounds check: bound must be > 0");
  return curve.max_abs_value() <= bound;
}

void DirectionGrid::validate() const {
  if (dim != 2 && dim != 3)
    throw ValidationError("direction grid: dimension must be 2 or 3");
  if (directions.empty()) throw ValidationError("direction grid: empty");
  for (const Point& d : directions) {
    if (std::abs(norm(d) - 1.0) > 1e-12)
      throw ValidationError("direction grid: non-unit direction");
    if (dim == 2 && d[2] != 0.0)
      throw ValidationError("direction grid: planar grid with z component");
  }
}

DirectionGrid step_grid(int count, double step_radians) {
  if (count < 1) throw ValidationError("direction grid: need at least one direction");
  DirectionGrid grid;
  grid.dim = 2;
  grid.directions.reserve(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) {
    const double theta = step_radians * p;
    grid.directions.push_back(Point{std::cos(theta), std::sin(theta), 0.0});
  }
  grid.validate();
  return grid;
}

DirectionGrid uniform_circle_grid(int count) {
  if (count < 1) throw ValidationError("direction grid: need at least one direction");
  return step_grid(count, 2.0 * std::numbers::pi / count);
}

DirectionGrid direction_grid_from_file(const std::filesystem::path& path,
                                       int dim) {
  if (dim != 2 && dim != 3)
    throw ValidationError("direction grid: dimension must be 2 or 3");
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open direction file: " + path.string());
  DirectionGrid grid;
  grid.dim = dim;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Point d{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a)
      if (!(row >> d[a]))
        throw ParseError("malformed direction row: " + line);
    double extra;
    if (row >> extra)
      throw ParseError("direction row has more than " + std::to_string(dim) +
                       " columns");
    const double len = norm(d);
    if (std::abs(len - 1.0) > 1e-6)
      throw ValidationError("direction file: vector is not unit length");
    for (double& c : d) c /= len;
    grid.directions.push_back(d);
  }
  grid.validate();
  return grid;
}

}  // namespace sectkit
