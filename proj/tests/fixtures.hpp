#pragma once

#include <random>
#include <vector>

#include "lrp/sampler.hpp"

namespace fixtures {

using lrp::BoxConfig;
using lrp::EdgeIndex;
using lrp::Point;
using lrp::Region;

inline BoxConfig all_nearest_neighbor(const Region& r) {
  std::vector<EdgeIndex> edges;
  for (std::uint32_t a = 0; a < r.size(); ++a) {
    Point p = r.point(a);
    for (int i = 0; i < r.dim(); ++i) {
      Point q = p + lrp::unit_vector(i);
      if (r.contains(q)) edges.emplace_back(a, static_cast<std::uint32_t>(r.index(q)));
    }
  }
  return BoxConfig(r, std::move(edges));
}

inline BoxConfig from_point_edges(const Region& r, const std::vector<std::pair<Point, Point>>& pe) {
  std::vector<EdgeIndex> edges;
  for (const auto& [a, b] : pe) {
    edges.emplace_back(static_cast<std::uint32_t>(r.index(a)), static_cast<std::uint32_t>(r.index(b)));
  }
  return BoxConfig(r, std::move(edges));
}

/// Each pair of the region joined independently with probability p.
inline BoxConfig random_graph(const Region& r, double p, std::uint64_t seed, std::int64_t max_len = 1 << 20) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<EdgeIndex> edges;
  for (std::uint32_t a = 0; a < r.size(); ++a) {
    for (std::uint32_t b = a + 1; b < r.size(); ++b) {
      if (lrp::norm_inf(r.point(a) - r.point(b)) <= max_len && coin(rng)) edges.emplace_back(a, b);
    }
  }
  return BoxConfig(r, std::move(edges));
}

/// Transitive closure by Floyd-Warshall; reach[a][b] iff an open path joins them.
inline std::vector<std::vector<char>> reachability(const BoxConfig& c) {
  const std::size_t n = c.vertex_count();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::uint32_t a = 0; a < n; ++a) {
    reach[a][a] = 1;
    for (auto b : c.neighbors(a)) reach[a][b] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  return reach;
}

}  // namespace fixtures
