#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "lrp/error.hpp"
#include "lrp/estimators.hpp"

using namespace lrp;

namespace {

double pl(double beta, double r, double s) { return 1.0 - std::exp(-beta * std::pow(r, -s)); }

// sum over y in Z \ S of p(x - y), brute force
double outside_sum_1d(double beta, double s, std::int64_t x, const std::vector<std::int64_t>& set) {
  long double sum = 0;
  const std::int64_t reach = 2'000'000;
  for (std::int64_t y = x - reach; y <= x + reach; ++y) {
    if (std::find(set.begin(), set.end(), y) != set.end()) continue;
    sum += pl(beta, static_cast<double>(std::llabs(x - y)), s);
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("exact oracle on small sets") {
  auto k = Kernel::power_law(2, 1.0, 3.0);
  const double beta = 0.7;
  const double p1 = pl(beta, 1.0, 3.0), pd = pl(beta, std::sqrt(2.0), 3.0);
  std::vector<Point> tri{Point{}, make_point({1, 0}), make_point({0, 1})};
  // direct edge, or the two-step route through (0,1)
  CHECK(exact_connect_oracle(k, beta, tri, Point{}, make_point({1, 0})) ==
        doctest::Approx(p1 + (1 - p1) * p1 * pd).epsilon(1e-14));
  CHECK(exact_connect_oracle(k, beta, tri, Point{}, Point{}) == 1.0);

  auto nn = Kernel::nearest_neighbor(1, 1.0);
  std::vector<Point> path{Point{}, make_point({1}), make_point({2})};
  const double p = 1 - std::exp(-2.0);
  CHECK(exact_connect_oracle(nn, 2.0, path, Point{}, make_point({2})) == doctest::Approx(p * p).epsilon(1e-14));

  std::vector<Point> seven;
  for (int i = 0; i < 7; ++i) seven.push_back(make_point({i}));
  CHECK_THROWS_AS(exact_connect_oracle(nn, 1.0, seven, Point{}, make_point({1})), Error);
  CHECK_THROWS_AS(exact_connect_oracle(nn, 1.0, path, make_point({5}), make_point({1})), Error);
}

TEST_CASE("monte carlo connection agrees with enumeration") {
  auto k = Kernel::power_law(2, 1.0, 3.0);
  const double beta = 0.9;
  std::vector<Point> v{Point{}, make_point({1, 0}), make_point({1, 1}), make_point({-1, 2}), make_point({2, -1})};
  for (const auto& y : v) {
    if (is_zero(y)) continue;
    const double exact = exact_connect_oracle(k, beta, v, Point{}, y);
    auto mc = connection_probability_mc(k, beta, v, Point{}, y, 4000, 7);
    const double sigma = std::sqrt(exact * (1 - exact) / 4000.0);
    CHECK(std::abs(mc.value - exact) <= 4 * sigma);
  }
}

TEST_CASE("box estimators on fixtures") {
  ConfigSource full = [](const Region& r, std::uint64_t) { return fixtures::all_nearest_neighbor(r); };
  ConfigSource none = [](const Region& r, std::uint64_t) { return BoxConfig(r, {}); };
  CHECK(boundary_connection_prob(full, 2, 5, 4, 1).value == 1.0);
  CHECK(boundary_connection_prob(none, 2, 5, 4, 1).value == 0.0);
  std::vector<double> samples;
  CHECK(theta_density(full, 2, 4, 3, 1, &samples).value == 1.0);
  CHECK(samples.size() == 3);
  CHECK(theta_density(none, 2, 4, 3, 1).value == doctest::Approx(1.0 / 81.0));
  CHECK_THROWS_AS(boundary_connection_prob(full, 2, 0, 4, 1), Error);
}

TEST_CASE("open mass matches a direct sum") {
  auto k = Kernel::power_law(1, 1.0, 3.0);
  long double direct = 0;
  for (std::int64_t y = 1; y <= 2'000'000; ++y) direct += 2 * pl(0.05, static_cast<double>(y), 3.0);
  CHECK(open_mass(k, 0.05, 0.0) == doctest::Approx(static_cast<double>(direct)).epsilon(1e-11));

  auto k2 = Kernel::power_law(2, 2.0, 4.5);
  long double d2 = 0;
  const std::int64_t m = 3000;
  // J = 2 r^-4.5
  for (std::int64_t a = -m; a <= m; ++a) {
    for (std::int64_t b = -m; b <= m; ++b) {
      const double r = std::sqrt(static_cast<double>(a * a + b * b));
      if (r > 3.0) d2 += 1.0 - std::exp(-1.6 * std::pow(r, -4.5));
    }
  }
  CHECK(open_mass(k2, 0.8, 3.0) == doctest::Approx(static_cast<double>(d2)).epsilon(1e-6));
  CHECK(open_mass(Kernel::nearest_neighbor(2, 1.0), 1.0, 0.0) == doctest::Approx(4 * (1 - std::exp(-1.0))));
}

TEST_CASE("phi of small sets") {
  auto k = Kernel::power_law(1, 1.0, 3.0);
  const double beta = 0.05;
  std::vector<Point> origin{Point{}};
  auto single = phi_value(k, beta, origin);
  CHECK(single.value == doctest::Approx(open_mass(k, beta, 0.0)).epsilon(1e-14));
  CHECK(single.certified);

  // S = {0, 1, 3}: connection probabilities by hand, outer sums brute force
  const std::vector<std::int64_t> s{0, 1, 3};
  const double p1 = pl(beta, 1, 3), p2 = pl(beta, 2, 3), p3 = pl(beta, 3, 3);
  const double to1 = p1 + (1 - p1) * p3 * p2;
  const double to3 = p3 + (1 - p3) * p1 * p2;
  const double oracle = outside_sum_1d(beta, 3, 0, s) + to1 * outside_sum_1d(beta, 3, 1, s) +
                        to3 * outside_sum_1d(beta, 3, 3, s);
  std::vector<Point> set{Point{}, make_point({1}), make_point({3})};
  auto got = phi_value(k, beta, set);
  CHECK(got.value == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(got.upper >= got.value);

  PhiMode mc{false, 20000, 3};
  auto est = phi_value(k, beta, set, mc);
  CHECK(std::abs(est.value - got.value) <= 4 * est.stderr + 1e-12);

  std::vector<Point> no_origin{make_point({1})};
  CHECK_THROWS_AS(phi_value(k, beta, no_origin), Error);
  std::vector<Point> big;
  for (int i = 0; i < 7; ++i) big.push_back(make_point({i}));
  CHECK_THROWS_AS(phi_value(k, beta, big), Error);
}

TEST_CASE("beta_c bracket") {
  BetacSettings st;
  st.schedule = {4, 8, 12};
  st.replicates = 60;
  st.tol = 0.02;
  auto nn = Kernel::nearest_neighbor(2, 1.0);
  auto b = betac_bracket(nn, st);
  CHECK(b.low >= b.gw_bound);
  CHECK(b.high - b.low <= st.tol + 1e-12);
  CHECK(b.low > 0.3);
  CHECK(b.high < 1.5);
  REQUIRE(b.curves.size() == 3);
  for (const auto& c : b.curves) {
    for (std::size_t i = 1; i < c.value.size(); ++i) CHECK(c.value[i] >= c.value[i - 1]);
    CHECK(std::is_sorted(c.critical.begin(), c.critical.end()));
  }
  // larger boxes are harder to cross
  CHECK(b.curves[2].crossing >= b.curves[0].crossing);

  auto again = betac_bracket(nn, st);
  CHECK(again.low == b.low);
  CHECK(again.high == b.high);

  st.criterion = BetacCriterion::DensityKnee;
  auto knee = betac_bracket(nn, st);
  CHECK(knee.high - knee.low <= st.tol + 1e-12);
  CHECK(knee.low >= knee.gw_bound);

  CHECK_THROWS_AS(betac_bracket(Kernel::zero(2), st), Error);
  st.schedule = {4, 8};
  CHECK_THROWS_AS(betac_bracket(nn, st), Error);
  CHECK(parse_criterion(to_string(BetacCriterion::DensityKnee)) == BetacCriterion::DensityKnee);
  CHECK_THROWS_AS(parse_criterion("median"), Error);
}

TEST_CASE("locality sweep is monotone under shared seeds") {
  BetacSettings st;
  st.schedule = {4, 6, 8};
  st.replicates = 40;
  auto k = Kernel::power_law(1, 1.0, 1.5);
  const double radii[] = {1.0, 2.0, 4.0};
  auto sweep = locality_sweep(k, radii, st);
  REQUIRE(sweep.size() == 4);
  CHECK(std::isinf(sweep.back().radius));
  // truncated kernels open a subset of the edges, so per-replicate critical points only shrink
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    const auto& prev = sweep[i - 1].bracket.curves.back().critical;
    const auto& cur = sweep[i].bracket.curves.back().critical;
    const double cap = sweep[i].bracket.cap;
    for (std::size_t j = 0; j < cur.size(); ++j) {
      // +inf only says the event needs beta beyond this kernel's cap
      if (std::isinf(cur[j])) {
        CHECK(prev[j] >= cap);
      } else {
        CHECK(cur[j] <= prev[j]);
      }
    }
  }
}
