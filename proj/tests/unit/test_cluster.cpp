#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "lrp/cluster.hpp"
#include "lrp/error.hpp"

using namespace lrp;

TEST_CASE("components examples") {
  Region r = Region::box(2, Point{}, 3);
  BoxConfig empty(r, {});
  auto f0 = components(empty);
  CHECK(f0.component_count() == r.size());
  for (std::uint32_t v = 0; v < r.size(); ++v) CHECK(f0.size_of(v) == 1);

  auto full = fixtures::all_nearest_neighbor(r);
  CHECK(components(full).component_count() == 1);

  auto path = fixtures::from_point_edges(
      r, {{Point{}, make_point({1, 0})}, {make_point({1, 0}), make_point({2, 0})}});
  auto f = components(path);
  CHECK(f.size_of(path.index(Point{})) == 3);
  CHECK(f.connected(path.index(Point{}), path.index(make_point({2, 0}))));
  CHECK(f.component_count() == r.size() - 2);
}

TEST_CASE("components agree with exhaustive path search") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Region r(2, Point{}, make_point({1 + static_cast<std::int64_t>(seed % 4), 1}));  // up to 10 vertices
    auto c = fixtures::random_graph(r, 0.25, seed);
    auto reach = fixtures::reachability(c);
    auto f = components(c);
    std::size_t total = 0;
    std::set<std::uint32_t> roots;
    for (std::uint32_t a = 0; a < c.vertex_count(); ++a) {
      roots.insert(f.root(a));
      for (std::uint32_t b = 0; b < c.vertex_count(); ++b) CHECK(f.connected(a, b) == static_cast<bool>(reach[a][b]));
    }
    for (auto root : roots) total += f.size_of(root);
    CHECK(total == c.vertex_count());
  }
}

TEST_CASE("restricted clusters") {
  Region r = Region::box(1, Point{}, 4);
  auto c = fixtures::from_point_edges(r, {{make_point({0}), make_point({1})}, {make_point({1}), make_point({2})}});
  const auto x = c.index(make_point({0}));
  std::vector<std::uint32_t> just_x{x};
  CHECK(restricted_cluster(c, x, just_x) == just_x);
  std::vector<std::uint32_t> no_mid{x, c.index(make_point({2}))};
  CHECK(restricted_cluster(c, x, no_mid).size() == 1);
  CHECK(restricted_cluster(c, x, r) == components(c).members(x));
  CHECK_THROWS_AS(restricted_cluster(c, c.index(make_point({3})), no_mid), Error);

  // nested in A
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Region big = Region::box(2, Point{}, 4);
    auto g = fixtures::random_graph(big, 0.05, seed);
    auto o = g.index(Point{});
    auto small = restricted_cluster(g, o, Region::box(2, Point{}, 2));
    auto large = restricted_cluster(g, o, Region::box(2, Point{}, 3));
    CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

TEST_CASE("largest cluster") {
  Region r = Region::box(2, Point{}, 3);
  BoxConfig empty(r, {});
  CHECK(largest_cluster(empty, r).size == 1);
  CHECK(empty.point(largest_cluster(empty, r).representative) == make_point({-3, -3}));
  CHECK(largest_cluster(empty, components(empty)).representative == largest_cluster(empty, r).representative);
  auto full = fixtures::all_nearest_neighbor(r);
  CHECK(largest_cluster(full, r).size == r.size());

  Region line = Region::box(1, Point{}, 10);
  std::vector<std::pair<Point, Point>> pe;
  for (int i = -10; i < -8; ++i) pe.push_back({make_point({i}), make_point({i + 1})});  // size 3
  for (int i = 0; i < 4; ++i) pe.push_back({make_point({i}), make_point({i + 1})});     // size 5
  auto c = fixtures::from_point_edges(line, pe);
  auto lc = largest_cluster(c, line);
  CHECK(lc.size == 5);
  CHECK(c.point(lc.representative) == make_point({0}));
  CHECK(largest_cluster(c, components(c)).size == 5);
  std::vector<std::uint32_t> none;
  CHECK_THROWS_AS(largest_cluster(c, std::span<const std::uint32_t>(none)), Error);

  // ties: two clusters of size 2, the lexicographically smaller wins
  auto tie = fixtures::from_point_edges(line, {{make_point({5}), make_point({6})}, {make_point({-2}), make_point({-1})}});
  CHECK(tie.point(largest_cluster(tie, line).representative) == make_point({-2}));
}

TEST_CASE("m-pads") {
  Region r = Region::box(2, Point{}, 4);
  BoxConfig empty(r, {});
  CHECK(find_mpads(empty, r, 0).size() == r.size());
  CHECK(find_mpads(empty, r, 1).empty());
  auto full = fixtures::all_nearest_neighbor(r);
  CHECK(find_mpads(full, r, 1).size() == 49);
  CHECK(find_mpads(full, r, 2).size() == 25);
  CHECK(find_mpads(full, Region::box(2, Point{}, 2), 2).size() == 1);
  // a pad connected only through an outside vertex is not a pad
  Region small = Region::box(1, Point{}, 3);
  auto detour = fixtures::from_point_edges(
      small, {{make_point({-1}), make_point({0})}, {make_point({0}), make_point({2})}, {make_point({1}), make_point({2})}});
  CHECK_FALSE(is_mpad(detour, Point{}, 1));
  CHECK(components(detour).connected(detour.index(make_point({-1})), detour.index(make_point({1}))));

  // monotone under adding edges
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = fixtures::random_graph(r, 0.08, seed, 2);
    auto pads = find_mpads(g, r, 1);
    auto bigger = g.with_edges(fixtures::random_graph(r, 0.05, seed + 100, 2).edges());
    auto pads2 = find_mpads(bigger, r, 1);
    for (const auto& p : pads) CHECK(std::find(pads2.begin(), pads2.end(), p) != pads2.end());
    CHECK(largest_cluster(bigger, r).size >= largest_cluster(g, r).size);
    for (const auto& p : pads) CHECK(is_mpad(g, p, 1));
  }
}

TEST_CASE("union find bookkeeping") {
  UnionFind uf(6);
  CHECK(uf.unite(0, 1));
  CHECK_FALSE(uf.unite(1, 0));
  CHECK(uf.unite(2, 3));
  CHECK(uf.unite(1, 3));
  CHECK(uf.size_of(2) == 4);
  CHECK(uf.largest() == 4);
  CHECK(uf.set_count() == 3);
}
