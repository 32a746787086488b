#include <cmath>
#include <set>

#include "doctest.h"
#include "lrp/coupling.hpp"
#include "lrp/error.hpp"
#include "lrp/sampler.hpp"

using namespace lrp;

namespace {

// Every pair of the region checked with edge_open; the naive O(V^2) oracle.
std::set<EdgeIndex> naive_edges(const Kernel& k, double beta, const Region& r, const CouplingField& f,
                                std::int64_t max_len) {
  std::set<EdgeIndex> out;
  for (std::uint32_t a = 0; a < r.size(); ++a) {
    for (std::uint32_t b = a + 1; b < r.size(); ++b) {
      Point pa = r.point(a), pb = r.point(b);
      if (norm_inf(pa - pb) > max_len) continue;
      if (edge_open(f, pa, pb, beta, k)) out.insert({a, b});
    }
  }
  return out;
}

std::set<EdgeIndex> as_set(const BoxConfig& c) {
  auto e = c.edges();
  return {e.begin(), e.end()};
}

}  // namespace

TEST_CASE("edge uniforms") {
  CouplingField f{7, 0};
  auto a = make_point({1, 2}), b = make_point({-3, 5});
  CHECK(edge_uniform(f, a, b, 2) == edge_uniform(f, b, a, 2));
  CHECK(edge_uniform(f, a, b, 2) == edge_uniform(f, a, b, 2));
  CHECK(edge_uniform(f, a, b, 2) != edge_uniform(CouplingField{7, 1}, a, b, 2));
  CHECK_THROWS_AS(edge_uniform(f, a, a, 2), Error);

  // 1e5 edges: mean within 4 sigma of 1/2
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = edge_uniform(f, make_point({i % 317, i / 317}), make_point({i % 317 + 1 + i % 5, i / 317 + i % 3}), 2);
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("edge_open basics and union law") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  CouplingField f{11, 0}, g{11, 1};
  auto a = Point{}, b = make_point({1, 0});
  CHECK_FALSE(edge_open(f, a, b, 0.0, k));
  CHECK_FALSE(edge_open(f, a, b, 10.0, Kernel::zero(2)));
  CHECK_THROWS_AS(union_field(a, b, k, f, 1.0, CouplingField{12, 0}, 1.0), Error);
  CHECK(union_field(a, b, k, f, 0.7, g, 0.0) == edge_open(f, a, b, 0.7, k));
  CHECK_FALSE(union_field(a, b, k, f, 0.0, g, 0.0));

  // monotone in beta
  for (int i = 0; i < 2000; ++i) {
    auto y = make_point({1 + i % 4, i % 3});
    CouplingField h{static_cast<std::uint64_t>(i), 0};
    bool prev = false;
    for (double beta : {0.1, 0.3, 0.7, 1.5, 3.0}) {
      bool now = edge_open(h, a, y, beta, k);
      CHECK((!prev || now));
      prev = now;
    }
  }
}

TEST_CASE("band machinery is consistent") {
  using namespace coupling_detail;
  CHECK(band_lower(0) == 0.0);
  CHECK(band_upper(kBandCount - 1) == 1.0);
  for (int b = 1; b < kBandCount; ++b) CHECK(band_lower(b) == band_upper(b - 1));
  // The band of an edge is found by the walker of its band.
  CouplingField f{3, 2};
  for (int i = 0; i < 500; ++i) {
    Point lo = make_point({i % 13 - 6, i / 13 - 20});
    Point v = make_point({1 + i % 3, i % 2});
    int band = edge_band(f, lo, v, 2);
    double u = edge_uniform(f, lo, lo + v, 2);
    CHECK(u >= band_lower(band));
    CHECK(u < band_upper(band));
  }
}

TEST_CASE("sampler agrees with per-edge evaluation") {
  struct Case {
    Kernel k;
    double beta;
    Region r;
  };
  std::vector<Case> cases{
      {Kernel::power_law(1, 1.0, 2.5), 0.8, Region::box(1, make_point({3}), 60)},
      {Kernel::power_law(2, 1.0, 4.0), 1.3, Region::box(2, make_point({-5, 2}), 7)},
      {truncate(Kernel::power_law(2, 1.0, 3.0), 3.5), 0.9, Region(2, make_point({0, 0}), make_point({12, 5}))},
      {Kernel::nearest_neighbor(2, 0.7), 1.0, Region::box(2, Point{}, 6)},
      {Kernel::power_law(3, 2.0, 7.0), 0.6, Region::box(3, make_point({1, 1, 1}), 3)},
      {Kernel::perturbed_nn(Kernel::power_law(2, 1.0, 5.0), 1.0), 0.4, Region::box(2, Point{}, 5)},
  };
  for (std::uint64_t seed : {1ULL, 99ULL, 123456789ULL}) {
    for (const auto& c : cases) {
      CouplingField f{seed, 0};
      SampleOptions o;
      o.exact = true;
      auto cfg = sample_region(c.k, c.beta, c.r, f, o);
      CHECK(as_set(cfg) == naive_edges(c.k, c.beta, c.r, f, 1 << 20));
    }
  }
}

TEST_CASE("cutoff respects the miss budget") {
  auto k = Kernel::power_law(2, 1.0, 7.0);
  auto box = Box{2, Point{}, 20};
  CouplingField f{5, 0};
  auto cfg = sample_box(k, 1.0, box, f, 1e-3);
  const auto& p = cfg.provenance();
  CHECK(p.skipped_bound < 1e-3);
  CHECK(p.cutoff_length < 40);
  CHECK(p.skipped_bound > 0.0);
  // within the cutoff the sample is exact
  CHECK(as_set(cfg) == naive_edges(k, 1.0, box.region(), f, p.cutoff_length));
  // the realized bound is the volume times beta times the infinity-norm tail
  double inside = 0.0;
  for_each_half_displacement(2, p.cutoff_length, [&](const Point& v) { inside += 2 * k(v); });
  double bound = 41.0 * 41.0 * (total_mass(k) - inside);
  CHECK(p.skipped_bound == doctest::Approx(bound).epsilon(1e-6));
  SampleOptions tiny;
  tiny.miss_budget = 1e-12;
  tiny.max_classes = 100;
  CHECK_THROWS_AS(sample_region(k, 1.0, Region::box(2, Point{}, 200), f, tiny), Error);
}

TEST_CASE("sampler examples and invariants") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  Box box{2, Point{}, 10};
  CouplingField f{17, 0};
  CHECK(sample_box(k, 0.0, box, f).edge_count() == 0);

  auto t = sample_box(truncate(k, 1.0), 2.0, box, f);
  CHECK(t.edge_count() > 0);
  for (auto [a, b] : t.edges()) CHECK(norm2_sq(t.point(a) - t.point(b)) == 1);

  // symmetric adjacency, endpoints inside
  auto c = sample_box(k, 1.0, box, f);
  for (std::uint32_t v = 0; v < c.vertex_count(); ++v) {
    for (auto w : c.neighbors(v)) CHECK(c.has_edge(w, v));
  }

  // monotone in beta
  std::set<EdgeIndex> prev;
  for (double beta : {0.2, 0.5, 1.0, 2.0}) {
    auto s = as_set(sample_box(truncate(k, 6.0), beta, box, f));
    CHECK(std::includes(s.begin(), s.end(), prev.begin(), prev.end()));
    prev = s;
  }

  // filter
  auto filtered = c.filter_max_length(2);
  std::set<EdgeIndex> expect;
  for (auto e : c.edges()) {
    if (norm_inf(c.point(e.first) - c.point(e.second)) <= 2) expect.insert(e);
  }
  CHECK(as_set(filtered) == expect);

  // regeneration and text round trip
  CHECK(regenerate(box.region(), c.provenance()) == c);
  auto text = serialize(c);
  auto back = deserialize(text);
  CHECK(back == c);
  CHECK(serialize(back) == text);

  auto rect = sample_region(k, 1.0, Region(2, make_point({-3, 0}), make_point({8, 4})), f);
  CHECK(deserialize(serialize(rect)) == rect);
}

TEST_CASE("threshold view matches direct sampling") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  auto r = Region::box(2, Point{}, 8);
  CouplingField f{23, 0};
  SampleOptions o;
  o.exact = true;
  auto cap = sample_edges(k, 2.0, r, f, o);
  for (double beta : {0.3, 0.9, 2.0}) {
    auto direct = sample_region(k, beta, r, f, o);
    CHECK(as_set(config_at_beta(cap, beta)) == as_set(direct));
  }
}

TEST_CASE("pf sampler") {
  Box box{1, Point{}, 30};
  CouplingField f{4, 0};
  CHECK(sample_box_pf(ShortEdgeFunction(0.0, Kernel::zero(1)), box, f).edge_count() == 0);
  auto all_nn = sample_box_pf(ShortEdgeFunction(1.0, Kernel::zero(1)), box, f);
  CHECK(all_nn.edge_count() == 60);
  auto sf = ShortEdgeFunction::power(1, 0.5, 1.2, 2.0);
  auto c = sample_box_pf(sf, box, f);
  CHECK(c.provenance().skipped_bound < 1e-3);
  CHECK(regenerate(box.region(), c.provenance()) == c);
  CHECK(deserialize(serialize(c)) == c);
}

TEST_CASE("pf sampler reaches every edge length") {
  // expected count of open long edges = sum over pairs of f, independent of the sampler
  Box box{1, Point{}, 40};
  auto f = ShortEdgeFunction::power(1, 0.6, 0.5, 2.0);
  for (const auto& sf : {f, make_counterexample_1d(f, 1.5, 4)}) {
    double mean = 0.0, var = 0.0;
    for (std::int64_t a = -40; a <= 40; ++a) {
      for (std::int64_t b = a + 2; b <= 40; ++b) {
        const double p = sf(make_point({b - a}));
        mean += p;
        var += p * (1 - p);
      }
    }
    const int reps = 400;
    double count = 0.0;
    for (int r = 0; r < reps; ++r) {
      auto c = sample_box_pf(sf, box, CouplingField{static_cast<std::uint64_t>(r), 0});
      CHECK(c.provenance().cutoff_length == 80);
      for (auto [a, b] : c.edges()) count += b - a >= 2;
    }
    CHECK(std::abs(count / reps - mean) <= 4 * std::sqrt(var / reps));
  }
}
