#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "lrp/error.hpp"
#include "lrp/walk.hpp"

using namespace lrp;

namespace {

// Dense Gaussian elimination on the Dirichlet Laplacian of the center's component.
double dense_resistance(const BoxConfig& c, std::uint32_t center, const std::vector<std::uint32_t>& boundary) {
  const auto reach = fixtures::reachability(c);
  const std::size_t nv = c.vertex_count();
  std::vector<int> kind(nv, 0);
  for (auto b : boundary) kind[b] = 2;
  kind[center] = 1;
  std::vector<std::uint32_t> unk;
  std::vector<int> slot(nv, -1);
  for (std::uint32_t v = 0; v < nv; ++v) {
    if (kind[v] == 0 && reach[center][v]) {
      slot[v] = static_cast<int>(unk.size());
      unk.push_back(v);
    }
  }
  const std::size_t n = unk.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto w : c.neighbors(unk[i])) {
      a[i][i] += 1.0;
      if (kind[w] == 1) a[i][n] += 1.0;
      if (slot[w] >= 0) a[i][static_cast<std::size_t>(slot[w])] -= 1.0;
    }
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t j = col; j <= n; ++j) a[r][j] -= f * a[col][j];
    }
  }
  double current = 0.0;
  for (auto w : c.neighbors(center)) {
    const double v = kind[w] == 2 ? 0.0 : a[static_cast<std::size_t>(slot[w])][n] / a[static_cast<std::size_t>(slot[w])][static_cast<std::size_t>(slot[w])];
    current += 1.0 - v;
  }
  return 1.0 / current;
}

}  // namespace

TEST_CASE("random walk basics") {
  Region r = Region::box(1, Point{}, 3);
  auto c = fixtures::from_point_edges(r, {{Point{}, make_point({1})}});
  const auto o = c.index(Point{});
  CHECK(return_frequency(c, o, 2, 50, 1).value == 1.0);
  CHECK(return_frequency(c, o, 1, 50, 1).value == 0.0);
  auto w = random_walk(c, o, 10, 3);
  CHECK(w.returns == 5);
  CHECK(w.first_return == 2);
  CHECK(w.returns <= w.steps);
  CHECK_THROWS_AS(return_frequency(c, c.index(make_point({3})), 5, 5, 1), Error);
  CHECK(return_frequency(c, o, 100, 20, 9).value == return_frequency(c, o, 100, 20, 9).value);
}

TEST_CASE("resistance of series and parallel circuits") {
  Region r = Region::box(2, Point{}, 3);
  const Point o{}, a = make_point({1, 0}), b = make_point({2, 0}), up = make_point({1, 1}), diag = make_point({2, 1});
  auto single = fixtures::from_point_edges(r, {{o, a}});
  std::vector<std::uint32_t> bnd{single.index(a)};
  CHECK(effective_resistance(single, single.index(o), bnd) == doctest::Approx(1.0).epsilon(1e-12));

  auto series = fixtures::from_point_edges(r, {{o, a}, {a, b}});
  std::vector<std::uint32_t> bb{series.index(b)};
  CHECK(effective_resistance(series, series.index(o), bb) == doctest::Approx(2.0).epsilon(1e-10));

  // two length-2 paths in parallel
  auto par = fixtures::from_point_edges(r, {{o, a}, {a, diag}, {o, up}, {up, diag}});
  std::vector<std::uint32_t> bd{par.index(diag)};
  CHECK(effective_resistance(par, par.index(o), bd) == doctest::Approx(1.0).epsilon(1e-10));

  auto none = fixtures::from_point_edges(r, {{o, a}});
  std::vector<std::uint32_t> far{none.index(b)};
  CHECK_THROWS_AS(effective_resistance(none, none.index(o), far), Error);
}

TEST_CASE("resistance matches dense elimination") {
  Region r = Region::box(1, Point{}, 3);  // 7 vertices
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto g = fixtures::random_graph(r, 0.4, seed);
    const auto center = g.index(make_point({-3}));
    std::vector<std::uint32_t> boundary{g.index(make_point({3}))};
    if (seed % 2) boundary.push_back(g.index(make_point({2})));
    if (!fixtures::reachability(g)[center][boundary[0]] &&
        (boundary.size() < 2 || !fixtures::reachability(g)[center][boundary[1]])) {
      CHECK_THROWS_AS(effective_resistance(g, center, boundary), Error);
      continue;
    }
    auto rep = effective_resistance_report(g, center, boundary);
    CHECK(rep.resistance == doctest::Approx(dense_resistance(g, center, boundary)).epsilon(1e-6));
    CHECK(rep.relative_residual <= 1e-8);
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("rayleigh monotonicity and growth") {
  Region r = Region::box(2, Point{}, 6);
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto base = fixtures::random_graph(r, 0.035, seed, 3).with_edges(fixtures::all_nearest_neighbor(Region::box(2, Point{}, 6)).edges());
    const auto o = base.index(Point{});
    auto ext = box_exterior(base, Point{}, 5);
    const double r0 = effective_resistance(base, o, ext);
    std::vector<EdgeIndex> extra;
    for (int i = 0; i < 5; ++i) {
      extra.emplace_back(static_cast<std::uint32_t>(rng() % base.vertex_count()),
                         static_cast<std::uint32_t>(rng() % base.vertex_count()));
      if (extra.back().first == extra.back().second) extra.pop_back();
    }
    CHECK(effective_resistance(base.with_edges(extra), o, ext) <= r0 * (1 + 1e-9));

    double prev = 0.0;
    for (std::int64_t n = 1; n <= 6; ++n) {
      const double rn = effective_resistance(base, o, box_exterior(base, Point{}, n));
      CHECK(rn >= prev * (1 - 1e-9));
      prev = rn;
    }
  }
}
