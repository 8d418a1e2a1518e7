#include "sectkit/ecc.hpp"

#include "sublevel_common.hpp"

namespace sectkit {

ECCurve ecc_mesh(const TriMesh& mesh, const Point& direction,
                 double bounding_radius) {
  detail::require_unit_direction(direction);
  const double horizon = 2.0 * bounding_radius;

  std::vector<double> heights;
  heights.reserve(mesh.vertices.size());
  for (const Point& v : mesh.vertices)
    heights.push_back(dot(v, direction) + bounding_radius);
  const auto index = detail::build_sublevel_index(std::move(heights), horizon);
  const auto& slot = index.slot;

  std::vector<int> jumps(index.unique_heights.size(), 0);
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) jumps[slot[v]] += 1;
  for (const auto& e : mesh.edges)
    jumps[std::max(slot[e[0]], slot[e[1]])] -= 1;
  for (const auto& t : mesh.triangles)
    jumps[std::max({slot[t[0]], slot[t[1]], slot[t[2]]})] += 1;
  for (const auto& t : mesh.tetrahedra)
    jumps[std::max({slot[t[0]], slot[t[1]], slot[t[2]], slot[t[3]]})] -= 1;

  return detail::curve_from_slot_jumps(horizon, index.unique_heights, jumps);
}

}  // namespace sectkit
