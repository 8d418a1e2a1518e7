#include <algorithm>
#include <bit>
#include <string>

#include "sectkit/ecc.hpp"
#include "sectkit/errors.hpp"
#include "sublevel_common.hpp"

namespace sectkit {
namespace {

constexpr double kMebSlack = 1e-12;

// Bitset rows of the pairwise intersection graph, 64 centers per word.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix(const std::vector<Point>& centers, double radius)
      : count_(centers.size()), words_((centers.size() + 63) / 64) {
    bits_.assign(count_ * words_, 0ull);
    const double reach = 2.0 * (radius + kMebSlack);
    const double reach2 = reach * reach;
    for (std::size_t i = 0; i < count_; ++i) {
      for (std::size_t j = i + 1; j < count_; ++j) {
        if (squared_distance(centers[i], centers[j]) <= reach2) {
          set(i, j);
          set(j, i);
        }
      }
    }
  }

  std::size_t words() const { return words_; }
  const std::uint64_t* row(std::size_t i) const { return &bits_[i * words_]; }

 private:
  void set(std::size_t i, std::size_t j) {
    bits_[i * words_ + j / 64] |= 1ull << (j % 64);
  }

  std::size_t count_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

// Clears bits [0, j] of a mask.
void clear_through(std::uint64_t* mask, std::size_t words, std::uint32_t j) {
  const std::size_t word = j / 64;
  for (std::size_t w = 0; w < word && w < words; ++w) mask[w] = 0;
  if (word < words) {
    const unsigned shift = j % 64;
    const std::uint64_t keep =
        (shift == 63) ? 0ull : ~((2ull << shift) - 1ull);
    mask[word] &= keep;
  }
}

bool mask_empty(const std::uint64_t* mask, std::size_t words) {
  for (std::size_t w = 0; w < words; ++w)
    if (mask[w]) return false;
  return true;
}

}  // namespace

BallNerve::BallNerve(const BallUnion& balls, NerveOptions options) {
  balls.validate();
  dim_ = balls.dim;
  radius_ = balls.radius;
  centers_ = balls.centers;
  const std::size_t n = centers_.size();
  const std::size_t cap = static_cast<std::size_t>(options.max_simplex_vertices);

  const AdjacencyMatrix adjacency(centers_, radius_);
  const std::size_t words = adjacency.words();

  offsets_.push_back(0);
  auto emit = [this](std::span<const std::uint32_t> simplex) {
    members_.insert(members_.end(), simplex.begin(), simplex.end());
    offsets_.push_back(static_cast<std::uint32_t>(members_.size()));
    max_dimension_ =
        std::max(max_dimension_, static_cast<int>(simplex.size()) - 1);
  };

  MebSolver meb(dim_);
  std::vector<std::uint32_t> members;
  std::vector<Point> member_points;
  std::vector<Ball> ball_stack;          // MEB per depth
  std::vector<std::uint64_t> mask_stack;  // candidate mask per depth, flattened

  members.reserve(cap + 1);
  member_points.reserve(cap + 1);
  ball_stack.reserve(cap + 1);
  mask_stack.assign((cap + 2) * words, 0ull);

  // Depth-first enumeration.  At each node the members form a valid simplex;
  // candidates are centers with index above the last member that are
  // adjacent to every member.  A candidate joins if the minimum enclosing
  // ball of members + candidate stays within the common radius.  The MEB is
  // monotone under inclusion, so a candidate that fails here fails for every
  // superset as well and is dropped from the mask handed to deeper levels.
  auto descend = [&](auto&& self, std::size_t depth) -> void {
    std::uint64_t* mask = &mask_stack[depth * words];
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t word = mask[w];
      while (word) {
        const std::uint32_t j =
            static_cast<std::uint32_t>(w * 64 + std::countr_zero(word));
        word &= word - 1;

        const Point& candidate = centers_[j];
        Ball ball = ball_stack[depth];
        if (!ball.contains(candidate, kMebSlack)) {
          member_points.push_back(candidate);
          ball = meb.compute(member_points);
          member_points.pop_back();
          if (!(ball.radius <= radius_ + kMebSlack)) {
            mask[w] &= ~(1ull << (j % 64));
            continue;
          }
        }

        members.push_back(j);
        if (members.size() > cap)
          throw ResourceError(
              "nerve simplex exceeds the configured vertex cap (" +
              std::to_string(cap) +
              "); use the raster backend for this shape");
        emit(members);

        std::uint64_t* next = &mask_stack[(depth + 1) * words];
        const std::uint64_t* adj = adjacency.row(j);
        for (std::size_t k = 0; k < words; ++k) next[k] = mask[k] & adj[k];
        clear_through(next, words, j);
        if (!mask_empty(next, words)) {
          member_points.push_back(candidate);
          ball_stack.push_back(ball);
          self(self, depth + 1);
          ball_stack.pop_back();
          member_points.pop_back();
        }
        members.pop_back();
      }
    }
  };

  for (std::uint32_t i = 0; i < n; ++i) {
    members.assign(1, i);
    member_points.assign(1, centers_[i]);
    emit(members);
    ball_stack.assign(1, Ball{centers_[i], 0.0});
    std::uint64_t* root_mask = &mask_stack[0];
    const std::uint64_t* adj = adjacency.row(i);
    for (std::size_t k = 0; k < words; ++k) root_mask[k] = adj[k];
    clear_through(root_mask, words, i);
    if (!mask_empty(root_mask, words)) descend(descend, 0);
  }
}

ECCurve BallNerve::ecc(const Point& direction, double bounding_radius) const {
  detail::require_unit_direction(direction);
  const double horizon = 2.0 * bounding_radius;

  std::vector<double> heights;
  heights.reserve(centers_.size());
  for (const Point& c : centers_)
    heights.push_back(dot(c, direction) + bounding_radius);
  const auto index = detail::build_sublevel_index(std::move(heights), horizon);
  const auto& slot = index.slot;

  std::vector<int> jumps(index.unique_heights.size(), 0);
  const std::size_t simplices = simplex_count();
  for (std::size_t s = 0; s < simplices; ++s) {
    const std::uint32_t begin = offsets_[s];
    const std::uint32_t end = offsets_[s + 1];
    std::uint32_t top = 0;
    for (std::uint32_t k = begin; k < end; ++k)
      top = std::max(top, slot[members_[k]]);
    // (-1)^dim with dim = (end - begin) - 1.
    jumps[top] += ((end - begin) & 1u) ? 1 : -1;
  }

  return detail::curve_from_slot_jumps(horizon, index.unique_heights, jumps);
}

ECCurve ecc_ball_union(const BallUnion& balls, const Point& direction,
                       double bounding_radius, BallBackend backend,
                       double raster_delta, NerveOptions options) {
  if (backend == BallBackend::cech_nerve) {
    // Planar unions take the lens-nerve route; it computes the same curve
    // as the enumerated nerve without materializing it.
    if (balls.dim == 2)
      return PlanarUnionFiltration(balls).ecc(direction, bounding_radius);
    return BallNerve(balls, options).ecc(direction, bounding_radius);
  }
  return RasterizedUnion(balls, raster_delta).ecc(direction, bounding_radius);
}

}  // namespace sectkit
