#include <cmath>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "lrp/coupling.hpp"
#include "lrp/error.hpp"
#include "lrp/renorm.hpp"

using namespace lrp;

TEST_CASE("annulus pad probe") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  CHECK(annulus_pad_probe(k, 0.0, 12, 1, 1.0, 5, 1).value == 0.0);
  ConfigSource full = [](const Region& r, std::uint64_t) { return fixtures::all_nearest_neighbor(r); };
  CHECK(annulus_pad_probe(full, 2, 12, 1, 1.0, 3, 1).value == 1.0);
  CHECK_THROWS_AS(annulus_pad_probe(k, 1.0, 6, 2, 1.0, 5, 1), Error);
  CHECK_THROWS_AS(annulus_pad_probe(k, 1.0, 6, 0, 1.5, 5, 1), Error);

  // monotone event under a shared coupling field
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    double prev = 0.0;
    for (double beta : {0.2, 0.5, 1.0, 2.0}) {
      const double v = annulus_pad_probe(k, beta, 9, 1, 1.0, 1, seed).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("directed survival model") {
  DirectedModel one{1.0, {}, 0};
  CHECK(directed_survival(one, 50, 20, 1).value == 1.0);
  DirectedModel zero{0.0, {}, 0};
  CHECK(directed_survival(zero, 1, 20, 1).value == 0.0);
  DirectedModel custom{0.0, [](std::int64_t, std::int64_t, int) { return 0.0; }, 0};
  CHECK(directed_survival(custom, 1, 20, 1).value == 0.0);

  // hand-derived law for depth 1 and 2
  for (double rho : {0.3, 0.7}) {
    CHECK(directed_survival_exact(rho, 1, 4) == doctest::Approx(1 - (1 - rho) * (1 - rho)).epsilon(1e-15));
    CHECK(directed_survival_exact(rho, 1, 1) == doctest::Approx(rho).epsilon(1e-15));
    const double q = 1 - rho;
    const double two = rho * rho * (1 - q * q * q) + 2 * rho * q * (1 - q * q);
    CHECK(directed_survival_exact(rho, 2, 5) == doctest::Approx(two).epsilon(1e-14));
  }

  // Monte Carlo on the same strip agrees with the transfer matrix
  DirectedModel strip{0.9, {}, 4};
  const double exact = directed_survival_exact(0.9, 30, 4);
  auto est = directed_survival(strip, 30, 4000, 5);
  CHECK(std::abs(est.value - exact) <= 4 * std::sqrt(exact * (1 - exact) / 4000.0));

  // common random numbers: survival is monotone in rho for every seed
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    double prev = 0.0;
    for (double rho : {0.5, 0.6, 0.7, 0.8, 0.9}) {
      const double v = directed_survival(DirectedModel{rho, {}, 0}, 25, 1, seed).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("directed exploration on fixtures") {
  StreamSource full = [](const Region& r, std::uint32_t) { return fixtures::all_nearest_neighbor(r); };
  ExplorationParams p;
  p.n = 3;
  p.m = 1;
  p.depth = 4;
  auto res = directed_exploration(full, 2, p);
  CHECK(res.survival_depth == 4);
  for (int k = 0; k <= 4; ++k) CHECK(res.active[static_cast<std::size_t>(k)].size() == static_cast<std::size_t>(k + 1));
  REQUIRE(res.certificate);
  CHECK(res.certificate->verified);
  CHECK(res.certificate->longest <= 14 * p.n);
  CHECK(Region::box(2, Point{}, p.m).contains(res.certificate->edges.front().first));
  CHECK(res.certificate->edges.back().second == res.certificate->target);

  // stream separation: pass 1 reads streams {base, A}, pass 2 reads {base, B}
  for (const auto& a : res.access) {
    if (a.phase == 1) CHECK(a.stream != kStreamSprinkleB);
    if (a.phase == 2) CHECK(a.stream != kStreamSprinkleA);
  }

  StreamSource empty = [](const Region& r, std::uint32_t) { return BoxConfig(r, {}); };
  auto dead = directed_exploration(empty, 2, p);
  CHECK(dead.survival_depth == -1);
  CHECK(dead.active.front().empty());

  auto bad = p;
  bad.m = 4;
  CHECK_THROWS_AS(directed_exploration(full, 2, bad), Error);
  CHECK_THROWS_AS(directed_exploration(full, 1, p), Error);
  bad = p;
  bad.max_edge = 14 * p.n + 1;
  CHECK_THROWS_AS(directed_exploration(full, 2, bad), Error);
}

TEST_CASE("directed exploration with a kernel") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  ExplorationParams p;
  p.n = 3;
  p.m = 1;
  p.depth = 3;
  CHECK(directed_exploration(k, 0.0, p, 1).survival_depth == -1);

  auto split = p;
  split.beta_tilde = 0.5;
  split.eta = 0.3;
  CHECK_THROWS_AS(directed_exploration(k, 1.0, split, 1), Error);

  int survived = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto res = directed_exploration(k, 3.0, p, seed);
    CHECK(res.beta_tilde == doctest::Approx(2.25));
    if (res.survival_depth < 0) continue;
    ++survived;
    REQUIRE(res.certificate);
    CHECK(res.certificate->verified);
    CHECK(res.certificate->failure.empty());
    CHECK(res.certificate->longest <= 14 * p.n);
    for (const auto& a : res.access) {
      if (a.phase == 2) CHECK(a.stream != kStreamSprinkleA);
    }
    // rerun is identical
    auto again = directed_exploration(k, 3.0, p, seed);
    CHECK(again.survival_depth == res.survival_depth);
    CHECK(again.certificate->edges == res.certificate->edges);
  }
  CHECK(survived > 0);
}

TEST_CASE("depth without pads") {
  auto k = Kernel::power_law(2, 1.0, 5.0);
  CHECK(depth_no_pad_probe(k, 0.0, 8.0, 2, 4, 10, 1).frequency.value == 0.0);
  ConfigSource full = [](const Region& r, std::uint64_t) { return fixtures::all_nearest_neighbor(r); };
  auto res = depth_no_pad_probe(full, 2, 8.0, 2, 64, 3, 1);
  CHECK(res.frequency.value == 0.0);
  CHECK(res.box_side == 2);
  CHECK(res.mean_boxes >= 1.0);
  CHECK_THROWS_AS(depth_no_pad_probe(k, 1.0, 2.0, 2, 4, 10, 1), Error);

  // a chain of length-2 hops: each K-box meets the chain in a single vertex, so
  // no omega_{<=1} cluster reaches the threshold while the ball keeps growing
  ConfigSource hops = [](const Region& r, std::uint64_t) {
    std::vector<std::pair<Point, Point>> e;
    for (std::int64_t i = r.lo()[0]; i + 2 <= r.hi()[0]; i += 2) e.push_back({make_point({i, 0}), make_point({i + 2, 0})});
    return fixtures::from_point_edges(r, e);
  };
  auto chain = depth_no_pad_probe(hops, 2, 8.0, 1, 16, 2, 1);
  CHECK(chain.frequency.value == 1.0);
  CHECK(chain.mean_boxes >= 8.0);
  CHECK(depth_no_pad_probe(hops, 2, 8.0, 2, 16, 2, 1).frequency.value == 1.0);  // N = 2 joins the chain but boxes still hold one vertex each
}
