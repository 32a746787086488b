#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrp/kernel.hpp"
#include "lrp/lattice.hpp"
#include "lrp/sampler.hpp"
#include "lrp/stats.hpp"

namespace lrp {

/// P(x <-> y within V) by enumerating all 2^|E| configurations on V (|V| <= 6).
double exact_connect_oracle(const Kernel& k, double beta, std::span<const Point> v, const Point& x, const Point& y);

/// P(x <-> some target within V) for arbitrary edge probabilities.
double exact_connect_probability(std::span<const Point> v, const Point& x, std::span<const Point> targets,
                                 const std::function<double(const Point&, const Point&)>& edge_probability);

/// One Monte Carlo connection query: x <-> targets using only vertices of `set`.
struct ConnectionQuery {
  std::vector<Point> set;
  Point x{};
  std::vector<Point> targets;
};

/// Answers every query from the same replicate configurations, sampled
/// exactly on `patch` (which must contain all query sets).
std::vector<Estimate> connection_probabilities_mc(const Kernel& k, double beta, const Region& patch,
                                                  std::span<const ConnectionQuery> queries, std::size_t replicates,
                                                  std::uint64_t seed, unsigned workers = 0);

Estimate connection_probability_mc(const Kernel& k, double beta, std::span<const Point> v, const Point& x,
                                   const Point& y, std::size_t replicates, std::uint64_t seed);

/// P(0 <-> boundary of B_n within B_n).
Estimate boundary_connection_prob(const ConfigSource& source, int dim, std::int64_t n, std::size_t replicates,
                                  std::uint64_t seed, unsigned workers = 0);
Estimate boundary_connection_prob(const Kernel& k, double beta, std::int64_t n, std::size_t replicates,
                                  std::uint64_t seed, unsigned workers = 0);

/// Mean of |K_max(B_n)| / |B_n|; the per-replicate densities are returned in `samples` when given.
Estimate theta_density(const ConfigSource& source, int dim, std::int64_t n, std::size_t replicates,
                       std::uint64_t seed, std::vector<double>* samples = nullptr, unsigned workers = 0);
Estimate theta_density(const Kernel& k, double beta, std::int64_t n, std::size_t replicates, std::uint64_t seed,
                       std::vector<double>* samples = nullptr, unsigned workers = 0);

enum class BetacCriterion { BoundaryCrossingHalf, DensityKnee };
std::string to_string(BetacCriterion c);
BetacCriterion parse_criterion(const std::string& s);

/// Criterion statistic against beta at one radius, from per-replicate
/// critical points (the smallest beta at which the replicate's event holds).
struct CriterionCurve {
  std::int64_t radius = 0;
  std::vector<double> critical;  // sorted; +inf when the event never occurs below the cap
  std::vector<double> beta;      // diagnostic grid
  std::vector<double> value;
  double crossing = 0.0;         // median of `critical`
  double crossing_stderr = 0.0;  // from the order statistics around the median

  /// Fraction of replicates whose event holds at beta.
  double value_at(double b) const;
};

struct BetaBracket {
  double low = 0.0;
  double high = 0.0;
  BetacCriterion criterion = BetacCriterion::BoundaryCrossingHalf;
  std::vector<std::int64_t> schedule;
  double gw_bound = 0.0;  // (sum J)^-1
  double cap = 0.0;       // largest beta sampled
  double stderr = 0.0;    // of the crossing at the largest radius
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<CriterionCurve> curves;

  double midpoint() const { return 0.5 * (low + high); }
};

struct BetacSettings {
  std::vector<std::int64_t> schedule{16, 32, 64};
  BetacCriterion criterion = BetacCriterion::BoundaryCrossingHalf;
  double tol = 0.05;
  std::size_t replicates = 200;
  std::uint64_t seed = 1;
  double miss_budget = 1e-3;
  unsigned workers = 0;
};

/// Finite-size beta_c bracket. Each replicate is sampled once at a cap with
/// its coupling field; edges enter in order of their opening threshold
/// -log(1-U)/J, so the per-replicate critical beta is exact and the criterion
/// is monotone in beta per seed. Bisection runs on the empirical statistic at
/// the largest radius; low is clamped up to the Galton-Watson bound.
BetaBracket betac_bracket(const Kernel& k, const BetacSettings& settings);

struct LocalityEntry {
  double radius = std::numeric_limits<double>::infinity();  // truncation N; inf for the full kernel
  BetaBracket bracket;
};

/// betac_bracket of truncate(k, N) for each N (shared seeds), then of k itself.
std::vector<LocalityEntry> locality_sweep(const Kernel& k, std::span<const double> truncations,
                                          const BetacSettings& settings);

struct PhiResult {
  double value = 0.0;
  double upper = 0.0;  // value plus the numerical tail tolerance (exact mode) or 4 stderr (mc)
  double stderr = 0.0;
  bool exact = true;
  bool certified = false;  // upper < 1
};

struct PhiMode {
  bool exact = true;
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
};

/// phi_{beta,J}(S) = sum_{x in S} sum_{y not in S} P(0 <-> x within S) (1 - e^{-beta J(x-y)}).
PhiResult phi_value(const Kernel& k, double beta, std::span<const Point> s, const PhiMode& mode = {});

}  // namespace lrp
