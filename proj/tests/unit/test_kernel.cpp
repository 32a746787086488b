#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "doctest.h"
#include "lrp/error.hpp"
#include "lrp/kernel.hpp"

using namespace lrp;

namespace {

// Brute-force sum of |x|^-s over a cube of side 2L+1, plus an integral
// estimate of what lies beyond; good enough to check the zeta path.
double brute_power_sum(int dim, double s, std::int64_t L) {
  long double total = 0;
  Point x{};
  std::function<void(int)> rec = [&](int axis) {
    if (axis == dim) {
      if (!is_zero(x)) total += std::pow(static_cast<long double>(norm2_sq(x)), -0.5L * s);
      return;
    }
    for (std::int64_t a = -L; a <= L; ++a) {
      x[axis] = a;
      rec(axis + 1);
    }
    x[axis] = 0;
  };
  rec(0);
  return static_cast<double>(total);
}

std::vector<Point> symmetry_images(const Point& x, int dim) {
  std::vector<int> perm(static_cast<std::size_t>(dim));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Point> out;
  do {
    for (int mask = 0; mask < (1 << dim); ++mask) {
      Point y{};
      for (int i = 0; i < dim; ++i) y[i] = ((mask >> i) & 1 ? -1 : 1) * x[perm[static_cast<std::size_t>(i)]];
      out.push_back(y);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

TEST_CASE("kernel evaluation examples") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  CHECK(k(make_point({1, 0})) == 1.0);
  CHECK(k(make_point({0, -1})) == 1.0);
  CHECK(truncate(k, 2.0)(make_point({3, 0})) == 0.0);
  CHECK(truncate(k, 1.0)(make_point({1, 1})) == 0.0);
  CHECK(truncate(k, 2.0)(make_point({1, 1})) == doctest::Approx(0.25));
  CHECK_THROWS_AS(k(Point{}), Error);
  try {
    k(Point{});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroDisplacement);
  }
}

TEST_CASE("open probability") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  CHECK(open_probability(k, 0.0, make_point({3, 1})) == 0.0);
  CHECK(open_probability(k, std::log(2.0), make_point({1, 0})) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(open_probability(Kernel::zero(2), 5.0, make_point({1, 0})) == 0.0);
  double prev = 0.0;
  for (double b = 0.0; b < 3.0; b += 0.25) {
    double p = open_probability(k, b, make_point({2, 1}));
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("symmetry of every family") {
  const int d = 3;
  std::map<Point, double> table{{make_point({1, 2, 0}), 0.3}, {make_point({0, 0, 1}), 0.7}};
  std::vector<Kernel> ks{Kernel::power_law(d, 2.0, 7.0), Kernel::nearest_neighbor(d, 1.5),
                         Kernel::tabulated(d, table), truncate(Kernel::power_law(d, 1.0, 7.0), 2.5),
                         Kernel::perturbed_nn(Kernel::power_law(d, 1.0, 7.0), 1.0)};
  for (const auto& k : ks) {
    for (auto x : {make_point({1, 2, 0}), make_point({-1, 0, 0}), make_point({3, -1, 2})}) {
      const double ref = k(x);
      for (const auto& y : symmetry_images(x, d)) CHECK(k(y) == ref);
    }
  }
}

TEST_CASE("kernel_mass") {
  auto k1 = Kernel::power_law(1, 1.0, 4.0);
  std::vector<Point> a{Point{}};
  std::vector<Point> b{make_point({1})};
  CHECK(kernel_mass(k1, a, b) == 1.0);
  std::vector<Point> b2{make_point({1}), make_point({2})};
  CHECK(kernel_mass(k1, a, b2) == doctest::Approx(1.0625).epsilon(1e-15));
  std::vector<Point> a3{Point{}, make_point({1})};
  std::vector<Point> b3{make_point({3}), make_point({4})};
  const double oracle = std::pow(3.0, -4) + std::pow(4.0, -4) + std::pow(2.0, -4) + std::pow(3.0, -4);
  CHECK(kernel_mass(k1, a3, b3) == doctest::Approx(oracle).epsilon(1e-15));
  CHECK_THROWS_AS(kernel_mass(k1, a3, a3), Error);

  // additivity over a disjoint split of B
  auto k2 = Kernel::power_law(2, 1.0, 5.0);
  std::vector<Point> A{Point{}, make_point({1, 0})};
  std::vector<Point> B{make_point({3, 1}), make_point({-2, 2})};
  std::vector<Point> C{make_point({0, 4})};
  std::vector<Point> BC{B};
  BC.insert(BC.end(), C.begin(), C.end());
  CHECK(kernel_mass(k2, A, BC) == doctest::Approx(kernel_mass(k2, A, B) + kernel_mass(k2, A, C)).epsilon(1e-14));
}

TEST_CASE("tail mass") {
  // 2 zeta(3), frozen from a direct summation to 1e-15.
  CHECK(tail_mass(Kernel::power_law(1, 1.0, 3.0), 0.0) == doctest::Approx(2.4041138063191885).epsilon(1e-13));
  CHECK(tail_mass(Kernel::nearest_neighbor(2, 1.0), 1.0) == 0.0);
  CHECK(tail_mass(truncate(Kernel::power_law(2, 1.0, 4.0), 3.0), 3.0) == 0.0);
  CHECK_THROWS_AS(tail_mass(Kernel::power_law(2, 1.0, 2.0), 0.0), Error);

  // d=2, s=5: brute cube sum out to 400 plus the 2 pi / (3 L^3) remainder.
  const double brute = brute_power_sum(2, 5.0, 400) + 2.0 * M_PI / (3.0 * std::pow(400.5, 3));
  CHECK(total_mass(Kernel::power_law(2, 1.0, 5.0)) == doctest::Approx(brute).epsilon(1e-8));
  // d=3, s=7
  const double brute3 = brute_power_sum(3, 7.0, 60) + 4.0 * M_PI / (4.0 * std::pow(60.5, 4));
  CHECK(total_mass(Kernel::power_law(3, 1.0, 7.0)) == doctest::Approx(brute3).epsilon(1e-7));

  // nonincreasing in R, tending to zero
  auto k = Kernel::power_law(2, 1.0, 4.0);
  double prev = tail_mass(k, 0.0);
  for (double r : {0.5, 1.0, 1.5, 2.0, 5.0, 10.0, 50.0, 200.0}) {
    double t = tail_mass(k, r);
    CHECK(t <= prev + 1e-15);
    prev = t;
  }
  CHECK(prev < 1e-4);

  // exact annulus identity
  auto k5 = Kernel::power_law(2, 1.0, 5.0);
  double ann = sum_over_ball(2, 6.0, [](const Point& key) {
    double n2 = static_cast<double>(norm2_sq(key));
    return n2 > 4.0 ? std::pow(n2, -2.5) : 0.0;
  });
  CHECK(tail_mass(k5, 2.0) - tail_mass(k5, 6.0) == doctest::Approx(ann).epsilon(1e-12));
}

TEST_CASE("l1 distance") {
  auto k = Kernel::power_law(1, 1.0, 4.0);
  CHECK(l1_distance(k, k) == 0.0);
  CHECK(l1_distance(k, truncate(k, 5.0)) == doctest::Approx(tail_mass(k, 5.0)).epsilon(1e-12));
  // 0.1 * 2 zeta(4) = 0.1 * pi^4 / 45
  CHECK(l1_distance(k, Kernel::power_law(1, 1.1, 4.0)) == doctest::Approx(0.1 * std::pow(M_PI, 4) / 45.0).epsilon(1e-12));
  CHECK_THROWS_AS(l1_distance(k, Kernel::power_law(2, 1.0, 4.0)), Error);

  // different exponents: direct summation oracle
  auto a = Kernel::power_law(1, 1.0, 3.0);
  auto b = Kernel::power_law(1, 2.0, 4.0);
  long double direct = 0;
  for (long n = 1; n <= 2000000; ++n) direct += 2 * std::fabs(std::pow((long double)n, -3.0L) - 2 * std::pow((long double)n, -4.0L));
  CHECK(l1_distance(a, b) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-10));
}

TEST_CASE("monotone truncation") {
  auto k = Kernel::power_law(2, 1.0, 4.0);
  for (double N : {1.0, 1.5, 3.0}) {
    auto t = truncate(k, N);
    for (std::int64_t a = -4; a <= 4; ++a) {
      for (std::int64_t b = -4; b <= 4; ++b) {
        if (a == 0 && b == 0) continue;
        auto x = make_point({a, b});
        CHECK(t(x) <= k(x));
        if (norm2(x) <= N) CHECK(t(x) == k(x));
      }
    }
    CHECK(truncate(t, N + 2.0)(make_point({1, 1})) == t(make_point({1, 1})));
  }
}

TEST_CASE("kernel spec round trip") {
  std::map<Point, double> table{{make_point({1, 2}), 0.3}, {make_point({0, 1}), 0.1}};
  std::vector<Kernel> ks{Kernel::power_law(2, 1.0 / 3.0, 4.5), Kernel::nearest_neighbor(2, 1.0),
                         truncate(Kernel::power_law(2, 1.0, 4.0), 8.0),
                         Kernel::perturbed_nn(Kernel::power_law(2, 1.0, 4.0), 1.0), Kernel::tabulated(2, table),
                         Kernel::zero(2),
                         Kernel::spliced(Kernel::tabulated(2, table), Kernel::power_law(2, 0.7, 5.0), 3.0)};
  for (const auto& k : ks) {
    auto k2 = parse_kernel(k.spec(), 2);
    CHECK(k2.spec() == k.spec());
    for (auto x : {make_point({1, 0}), make_point({2, 1}), make_point({5, 3})}) CHECK(k2(x) == k(x));
  }
  CHECK_THROWS_AS(parse_kernel("power_law(1", 2), Error);
  CHECK_THROWS_AS(parse_kernel("bogus(1,2)", 2), Error);
}

TEST_CASE("short-edge function and the 1D counterexample") {
  auto f = ShortEdgeFunction::power(1, 0.5, 0.3, 3.0);
  CHECK(f(make_point({1})) == 0.5);
  CHECK(f(make_point({2})) == doctest::Approx(0.3 / 8.0));
  CHECK_THROWS_AS(ShortEdgeFunction(0.5, Kernel::power_law(1, 5.0, 2.0)), Error);

  const std::int64_t n = 5;
  auto fn = make_counterexample_1d(f, 1.2, n);
  for (std::int64_t x = 1; x <= n; ++x) CHECK(fn(make_point({x})) == f(make_point({x})));
  CHECK(fn(make_point({2 * n})) == doctest::Approx(1.2 / (4.0 * n * n)));
  CHECK(fn(make_point({-2 * n})) == fn(make_point({2 * n})));
  CHECK_THROWS_AS(make_counterexample_1d(ShortEdgeFunction::power(2, 0.5, 0.3, 3.0), 1.2, 3), Error);
  CHECK_THROWS_AS(make_counterexample_1d(f, 1.0, 3), Error);

  // gap sum_{|x|>n} |f(x) - gamma/x^2| decreases in n (direct summation)
  auto gap = [&](std::int64_t m) {
    long double g = 0;
    for (std::int64_t x = m + 1; x < 2000000; ++x) {
      g += 2 * std::fabs(0.3L / ((long double)x * x * x) - 1.2L / ((long double)x * x));
    }
    return g;
  };
  CHECK(gap(10) > gap(20));
  CHECK(parse_short_edge_function(fn.spec(), 1).spec() == fn.spec());
}
