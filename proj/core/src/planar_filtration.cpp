#include <algorithm>
#include <bit>

#include "sectkit/ecc.hpp"
#include "sectkit/errors.hpp"
#include "sublevel_common.hpp"

namespace sectkit {
namespace {

constexpr double kMebSlack = 1e-12;

// Union-find over at most 64 * words local vertices.
struct SmallUnionFind {
  std::array<std::uint16_t, 256> parent;

  std::uint16_t find(std::uint16_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  bool merge(std::uint16_t a, std::uint16_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

PlanarUnionFiltration::PlanarUnionFiltration(const BallUnion& balls) {
  balls.validate();
  if (balls.dim != 2)
    throw ValidationError(
        "planar union filtration supports 2-dimensional ball unions only");
  radius_ = balls.radius;
  centers_ = balls.centers;
  const std::size_t n = centers_.size();
  const double reach = 2.0 * (radius_ + kMebSlack);
  const double reach2 = reach * reach;

  MebSolver meb(2);
  std::vector<Point> probe;
  auto common_point = [&](std::initializer_list<std::uint32_t> ids) {
    probe.clear();
    for (std::uint32_t id : ids) probe.push_back(centers_[id]);
    return meb.compute(probe).radius <= radius_ + kMebSlack;
  };

  tables_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    CenterTables& table = tables_[i];
    for (std::uint32_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (squared_distance(centers_[i], centers_[j]) <= reach2)
        table.neighbors.push_back(j);
    }
    const std::size_t k = table.neighbors.size();
    if (k > 250)
      throw ResourceError(
          "ball union too dense for the planar filtration tables");
    table.words = (k + 63) / 64;
    table.pair_bits.assign(k * table.words, 0ull);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        if (!common_point({i, table.neighbors[a], table.neighbors[b]}))
          continue;
        table.pair_bits[a * table.words + b / 64] |= 1ull << (b % 64);
        table.pair_bits[b * table.words + a / 64] |= 1ull << (a % 64);
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        if (!(table.pair_bits[a * table.words + b / 64] >> (b % 64) & 1ull))
          continue;
        for (std::size_t c = b + 1; c < k; ++c) {
          const bool ac =
              table.pair_bits[a * table.words + c / 64] >> (c % 64) & 1ull;
          const bool bc =
              table.pair_bits[b * table.words + c / 64] >> (c % 64) & 1ull;
          if (!ac || !bc) continue;
          if (common_point(
                  {i, table.neighbors[a], table.neighbors[b], table.neighbors[c]}))
            table.triangles.push_back({static_cast<std::uint16_t>(a),
                                       static_cast<std::uint16_t>(b),
                                       static_cast<std::uint16_t>(c)});
        }
      }
    }
  }
}

ECCurve PlanarUnionFiltration::ecc(const Point& direction,
                                   double bounding_radius) const {
  detail::require_unit_direction(direction);
  const double horizon = 2.0 * bounding_radius;
  const std::size_t n = centers_.size();

  std::vector<double> heights;
  heights.reserve(n);
  for (const Point& c : centers_)
    heights.push_back(dot(c, direction) + bounding_radius);
  const auto index = detail::build_sublevel_index(std::move(heights), horizon);
  const auto& slot = index.slot;

  // Entry order: by height slot, ties by center id.  "Earlier" below is
  // relative to this order; within a tie group the order is immaterial for
  // the accumulated jump.
  auto earlier = [&slot](std::uint32_t j, std::uint32_t i) {
    return slot[j] != slot[i] ? slot[j] < slot[i] : j < i;
  };

  std::vector<int> jumps(index.unique_heights.size(), 0);
  std::vector<std::uint64_t> mask;
  std::vector<std::uint16_t> vertices;
  std::vector<std::uint32_t> edge_id;
  std::vector<std::uint64_t> rows;
  SmallUnionFind uf;

  for (std::uint32_t i = 0; i < n; ++i) {
    const CenterTables& table = tables_[i];
    const std::size_t k = table.neighbors.size();

    mask.assign(table.words, 0ull);
    vertices.clear();
    for (std::size_t a = 0; a < k; ++a) {
      if (earlier(table.neighbors[a], i)) {
        mask[a / 64] |= 1ull << (a % 64);
        vertices.push_back(static_cast<std::uint16_t>(a));
      }
    }
    const int v_count = static_cast<int>(vertices.size());
    if (v_count == 0) {
      jumps[slot[i]] += 1;
      continue;
    }

    for (std::uint16_t a : vertices) uf.parent[a] = a;
    int components = v_count;
    int e_count = 0;
    for (std::uint16_t a : vertices) {
      const std::uint64_t* row = &table.pair_bits[a * table.words];
      for (std::size_t w = 0; w < table.words; ++w) {
        std::uint64_t word = row[w] & mask[w];
        // Count each undirected edge once: keep bits above a.
        if (w == a / 64)
          word &= (a % 64 == 63) ? 0ull : ~((2ull << (a % 64)) - 1ull);
        else if (w < a / 64)
          word = 0ull;
        while (word) {
          const auto b = static_cast<std::uint16_t>(w * 64 +
                                                    std::countr_zero(word));
          word &= word - 1;
          ++e_count;
          if (uf.merge(a, b)) --components;
        }
      }
    }

    int beta1 = 0;
    const int cycle_rank = e_count - v_count + components;
    if (cycle_rank > 0) {
      // H1 of the lens nerve: cycle rank of the 1-skeleton minus the rank of
      // the triangle boundary map over GF(2).
      edge_id.assign(k * k, 0);
      std::uint32_t edges = 0;
      for (std::uint16_t a : vertices) {
        const std::uint64_t* row = &table.pair_bits[a * table.words];
        for (std::size_t w = 0; w < table.words; ++w) {
          std::uint64_t word = row[w] & mask[w];
          if (w == a / 64)
            word &= (a % 64 == 63) ? 0ull : ~((2ull << (a % 64)) - 1ull);
          else if (w < a / 64)
            word = 0ull;
          while (word) {
            const auto b = static_cast<std::uint16_t>(w * 64 +
                                                      std::countr_zero(word));
            word &= word - 1;
            edge_id[a * k + b] = edges;
            edge_id[b * k + a] = edges;
            ++edges;
          }
        }
      }
      const std::size_t row_words = (edges + 63) / 64;
      rows.clear();
      for (const auto& tri : table.triangles) {
        const bool in0 = mask[tri[0] / 64] >> (tri[0] % 64) & 1ull;
        const bool in1 = mask[tri[1] / 64] >> (tri[1] % 64) & 1ull;
        const bool in2 = mask[tri[2] / 64] >> (tri[2] % 64) & 1ull;
        if (!in0 || !in1 || !in2) continue;
        rows.resize(rows.size() + row_words, 0ull);
        std::uint64_t* row = &rows[rows.size() - row_words];
        for (const auto [x, y] : {std::pair<int, int>{0, 1}, {0, 2}, {1, 2}}) {
          const std::uint32_t e = edge_id[tri[x] * k + tri[y]];
          row[e / 64] ^= 1ull << (e % 64);
        }
      }
      // GF(2) elimination.
      int rank = 0;
      const std::size_t triangle_rows = rows.size() / row_words;
      std::vector<std::uint64_t*> pending;
      pending.reserve(triangle_rows);
      for (std::size_t t = 0; t < triangle_rows; ++t)
        pending.push_back(&rows[t * row_words]);
      for (std::size_t t = 0; t < pending.size(); ++t) {
        std::uint64_t* row = pending[t];
        int pivot = -1;
        for (std::size_t w = 0; w < row_words && pivot < 0; ++w)
          if (row[w]) pivot = static_cast<int>(w * 64 + std::countr_zero(row[w]));
        if (pivot < 0) continue;
        ++rank;
        for (std::size_t u = t + 1; u < pending.size(); ++u) {
          std::uint64_t* other = pending[u];
          if (other[pivot / 64] >> (pivot % 64) & 1ull)
            for (std::size_t w = 0; w < row_words; ++w) other[w] ^= row[w];
        }
      }
      beta1 = cycle_rank - rank;
    }

    jumps[slot[i]] += 1 - components + beta1;
  }

  return detail::curve_from_slot_jumps(horizon, index.unique_heights, jumps);
}

}  // namespace sectkit
