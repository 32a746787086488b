#include "lrp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lrp/cluster.hpp"
#include "lrp/coupling.hpp"
#include "lrp/error.hpp"
#include "lrp/parallel.hpp"

namespace lrp {

// --- exact enumeration ---------------------------------------------------------

namespace {

std::size_t position_of(std::span<const Point> v, const Point& p) {
  auto it = std::find(v.begin(), v.end(), p);
  return static_cast<std::size_t>(it - v.begin());
}

}  // namespace

double exact_connect_probability(std::span<const Point> v, const Point& x, std::span<const Point> targets,
                                 const std::function<double(const Point&, const Point&)>& edge_probability) {
  require(v.size() <= 6, ErrorCode::TooLarge, "exact enumeration is limited to 6 vertices");
  const std::size_t n = v.size();
  const std::size_t ix = position_of(v, x);
  require(ix < n, ErrorCode::SourceOutsideSet, "x is not in V");
  unsigned target_mask = 0;
  for (const auto& t : targets) {
    const std::size_t it = position_of(v, t);
    require(it < n, ErrorCode::InvalidArgument, "target is not in V");
    target_mask |= 1U << it;
  }
  if (target_mask & (1U << ix)) return 1.0;

  struct E {
    std::size_t a, b;
    double p;
  };
  std::vector<E> edges;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) edges.push_back({a, b, edge_probability(v[a], v[b])});
  }
  long double total = 0;
  const std::size_t m = edges.size();
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    long double w = 1;
    unsigned reach = 1U << ix;
    for (std::size_t e = 0; e < m; ++e) w *= (mask >> e) & 1 ? edges[e].p : 1.0 - edges[e].p;
    if (w == 0) continue;
    // closure of reach over the open edges
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t e = 0; e < m; ++e) {
        if (!((mask >> e) & 1)) continue;
        const unsigned ba = 1U << edges[e].a, bb = 1U << edges[e].b;
        if (((reach & ba) != 0) != ((reach & bb) != 0)) {
          reach |= ba | bb;
          grew = true;
        }
      }
    }
    if (reach & target_mask) total += w;
  }
  return static_cast<double>(total);
}

double exact_connect_oracle(const Kernel& k, double beta, std::span<const Point> v, const Point& x, const Point& y) {
  require(v.size() <= 6, ErrorCode::TooLarge, "exact enumeration is limited to 6 vertices");
  require(std::find(v.begin(), v.end(), y) != v.end(), ErrorCode::InvalidArgument, "y is not in V");
  const Point t[] = {y};
  return exact_connect_probability(v, x, t, [&](const Point& a, const Point& b) {
    return open_probability(k, beta, a - b);
  });
}

// --- Monte Carlo connection probabilities -----------------------------------------

std::vector<Estimate> connection_probabilities_mc(const Kernel& k, double beta, const Region& patch,
                                                  std::span<const ConnectionQuery> queries, std::size_t replicates,
                                                  std::uint64_t seed, unsigned workers) {
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  struct Prepared {
    std::vector<std::uint32_t> set;
    std::uint32_t x;
    std::vector<std::uint32_t> targets;
  };
  std::vector<Prepared> prepared;
  for (const auto& q : queries) {
    Prepared p;
    for (const auto& s : q.set) {
      require(patch.contains(s), ErrorCode::InvalidArgument, "query vertex outside the patch");
      p.set.push_back(static_cast<std::uint32_t>(patch.index(s)));
    }
    require(std::find(q.set.begin(), q.set.end(), q.x) != q.set.end(), ErrorCode::SourceOutsideSet,
            "query source not in its set");
    p.x = static_cast<std::uint32_t>(patch.index(q.x));
    for (const auto& t : q.targets) p.targets.push_back(static_cast<std::uint32_t>(patch.index(t)));
    prepared.push_back(std::move(p));
  }
  SampleOptions exact;
  exact.exact = true;
  auto hits = parallel_map<std::vector<char>>(
      replicates,
      [&](std::size_t r) {
        auto cfg = sample_region(k, beta, patch, CouplingField{derive_seed(seed, r), kStreamBase}, exact);
        std::vector<char> in_set(patch.size(), 0), seen(patch.size(), 0);
        std::vector<char> out(prepared.size(), 0);
        std::vector<std::uint32_t> queue;
        for (std::size_t qi = 0; qi < prepared.size(); ++qi) {
          const auto& q = prepared[qi];
          for (auto v : q.set) in_set[v] = 1;
          queue.assign(1, q.x);
          seen[q.x] = 1;
          for (std::size_t h = 0; h < queue.size(); ++h) {
            for (auto w : cfg.neighbors(queue[h])) {
              if (in_set[w] && !seen[w]) {
                seen[w] = 1;
                queue.push_back(w);
              }
            }
          }
          for (auto t : q.targets) out[qi] |= seen[t];
          for (auto v : queue) seen[v] = 0;
          for (auto v : q.set) in_set[v] = 0;
        }
        return out;
      },
      workers);
  std::vector<Estimate> est;
  std::vector<double> samples(replicates);
  for (std::size_t qi = 0; qi < prepared.size(); ++qi) {
    for (std::size_t r = 0; r < replicates; ++r) samples[r] = hits[r][qi];
    est.push_back(make_estimate(samples, seed, "mc-connection"));
  }
  return est;
}

Estimate connection_probability_mc(const Kernel& k, double beta, std::span<const Point> v, const Point& x,
                                   const Point& y, std::size_t replicates, std::uint64_t seed) {
  require(!v.empty(), ErrorCode::EmptySet, "empty vertex set");
  Point lo = v.front(), hi = v.front();
  for (const auto& p : v) {
    for (int i = 0; i < k.dim(); ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  }
  ConnectionQuery q{{v.begin(), v.end()}, x, {y}};
  return connection_probabilities_mc(k, beta, Region(k.dim(), lo, hi), std::span(&q, 1), replicates, seed)[0];
}

// --- box estimators ----------------------------------------------------------------

Estimate boundary_connection_prob(const ConfigSource& source, int dim, std::int64_t n, std::size_t replicates,
                                  std::uint64_t seed, unsigned workers) {
  require(n >= 1, ErrorCode::InvalidArgument, "box radius must be >= 1");
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  const Region box = Region::box(dim, Point{}, n);
  auto samples = parallel_map<double>(
      replicates,
      [&](std::size_t r) {
        auto cfg = source(box, derive_seed(seed, r));
        const std::uint32_t o[] = {cfg.index(Point{})};
        std::vector<char> seen(cfg.vertex_count(), 0);
        std::vector<std::uint32_t> queue(o, o + 1);
        seen[o[0]] = 1;
        for (std::size_t h = 0; h < queue.size(); ++h) {
          if (norm_inf(cfg.point(queue[h])) == n) return 1.0;
          for (auto w : cfg.neighbors(queue[h])) {
            if (!seen[w]) {
              seen[w] = 1;
              queue.push_back(w);
            }
          }
        }
        return 0.0;
      },
      workers);
  return make_estimate(samples, seed, "mc-boundary-connection");
}

Estimate boundary_connection_prob(const Kernel& k, double beta, std::int64_t n, std::size_t replicates,
                                  std::uint64_t seed, unsigned workers) {
  return boundary_connection_prob(kernel_source(k, beta), k.dim(), n, replicates, seed, workers);
}

Estimate theta_density(const ConfigSource& source, int dim, std::int64_t n, std::size_t replicates, std::uint64_t seed,
                       std::vector<double>* samples_out, unsigned workers) {
  require(n >= 1, ErrorCode::InvalidArgument, "box radius must be >= 1");
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  const Region box = Region::box(dim, Point{}, n);
  auto samples = parallel_map<double>(
      replicates,
      [&](std::size_t r) {
        auto cfg = source(box, derive_seed(seed, r));
        ClusterForest forest(cfg);
        return static_cast<double>(largest_cluster(cfg, forest).size) / static_cast<double>(box.size());
      },
      workers);
  if (samples_out) *samples_out = samples;
  return make_estimate(samples, seed, "mc-largest-cluster-density");
}

Estimate theta_density(const Kernel& k, double beta, std::int64_t n, std::size_t replicates, std::uint64_t seed,
                       std::vector<double>* samples, unsigned workers) {
  return theta_density(kernel_source(k, beta), k.dim(), n, replicates, seed, samples, workers);
}

// --- beta_c -----------------------------------------------------------------------------

std::string to_string(BetacCriterion c) {
  return c == BetacCriterion::BoundaryCrossingHalf ? "boundary_crossing_half" : "density_knee";
}

BetacCriterion parse_criterion(const std::string& s) {
  if (s == "boundary_crossing_half") return BetacCriterion::BoundaryCrossingHalf;
  if (s == "density_knee") return BetacCriterion::DensityKnee;
  fail(ErrorCode::ConfigParse, "unknown beta_c criterion '" + s + "'");
}

double CriterionCurve::value_at(double b) const {
  if (critical.empty()) return 0.0;
  auto it = std::lower_bound(critical.begin(), critical.end(), b);
  return static_cast<double>(it - critical.begin()) / static_cast<double>(critical.size());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest beta at which the replicate's event holds, given its edges sampled at the cap.
double critical_beta(const EdgeSample& s, std::int64_t n, BetacCriterion criterion) {
  std::vector<std::size_t> order(s.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> th(s.edges.size());
  for (std::size_t i = 0; i < th.size(); ++i) th[i] = s.edges[i].threshold();
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return th[a] < th[b] || (th[a] == th[b] && a < b); });

  const auto nv = static_cast<std::uint32_t>(s.region.size());
  UnionFind uf(nv);
  if (criterion == BetacCriterion::BoundaryCrossingHalf) {
    std::vector<char> touches(nv, 0);
    for (std::uint32_t v = 0; v < nv; ++v) touches[v] = norm_inf(s.region.point(v)) == n;
    const auto origin = static_cast<std::uint32_t>(s.region.index(Point{}));
    for (auto i : order) {
      const auto& e = s.edges[i];
      const char t = touches[uf.find(e.a)] | touches[uf.find(e.b)];
      if (uf.unite(e.a, e.b)) {
        touches[uf.find(e.a)] = t;
        if (t && uf.find(origin) == uf.find(e.a)) return th[i];
      }
    }
    return kInf;
  }
  // density knee: the threshold of the largest single jump of |K_max|
  std::uint32_t best_jump = 0;
  double knee = kInf;
  for (auto i : order) {
    const auto before = uf.largest();
    uf.unite(s.edges[i].a, s.edges[i].b);
    const auto jump = uf.largest() - before;
    if (jump > best_jump) {
      best_jump = jump;
      knee = th[i];
    }
  }
  return knee;
}

CriterionCurve make_curve(std::int64_t radius, std::vector<double> critical, double grid_lo, double grid_hi) {
  CriterionCurve c;
  c.radius = radius;
  std::sort(critical.begin(), critical.end());
  c.critical = std::move(critical);
  const std::size_t r = c.critical.size();
  const std::size_t mid = (r + 1) / 2 - 1;
  c.crossing = c.critical[mid];
  const auto spread = static_cast<std::size_t>(std::ceil(0.5 * std::sqrt(static_cast<double>(r))));
  const std::size_t lo = mid >= spread ? mid - spread : 0;
  const std::size_t hi = std::min(r - 1, mid + spread);
  c.crossing_stderr = 0.5 * (c.critical[hi] - c.critical[lo]);
  const int points = 25;
  for (int i = 0; i < points; ++i) {
    const double b = grid_lo + (grid_hi - grid_lo) * i / (points - 1);
    c.beta.push_back(b);
    c.value.push_back(c.value_at(b));
  }
  return c;
}

}  // namespace

BetaBracket betac_bracket(const Kernel& k, const BetacSettings& st) {
  require(st.schedule.size() >= 3, ErrorCode::InvalidArgument, "beta_c schedule needs at least 3 radii");
  for (std::size_t i = 0; i < st.schedule.size(); ++i) {
    require(st.schedule[i] >= 1 && (i == 0 || st.schedule[i] > st.schedule[i - 1]), ErrorCode::InvalidArgument,
            "beta_c schedule must be increasing positive radii");
  }
  require(st.tol > 0.0, ErrorCode::InvalidArgument, "tol must be positive");
  require(st.replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  const double mass = total_mass(k);
  require(mass > 0.0, ErrorCode::NoCrossing, "kernel is identically zero: no crossing");

  BetaBracket out;
  out.criterion = st.criterion;
  out.schedule = st.schedule;
  out.gw_bound = 1.0 / mass;
  out.replicates = st.replicates;
  out.seed = st.seed;
  SampleOptions opt;
  opt.miss_budget = st.miss_budget;

  double cap = 4.0 * out.gw_bound;
  for (int attempt = 0;; ++attempt) {
    std::vector<CriterionCurve> curves;
    for (auto n : st.schedule) {
      const Region box = Region::box(k.dim(), Point{}, n);
      auto crit = parallel_map<double>(
          st.replicates,
          [&](std::size_t r) {
            auto s = sample_edges(k, cap, box, CouplingField{derive_seed(st.seed, r), kStreamBase}, opt);
            return critical_beta(s, n, st.criterion);
          },
          st.workers);
      curves.push_back(make_curve(n, std::move(crit), 0.0, cap));
    }
    const auto& last = curves.back();
    if (last.value_at(cap) >= 0.5) {
      out.curves = std::move(curves);
      break;
    }
    require(attempt < 6, ErrorCode::NoCrossing,
            "criterion never reaches 1/2 up to beta=" + std::to_string(cap) + ": no crossing");
    cap *= 2.0;
  }
  out.cap = cap;

  const auto& curve = out.curves.back();
  double lo = 0.0, hi = cap;
  while (hi - lo > st.tol) {
    const double mid = 0.5 * (lo + hi);
    if (curve.value_at(mid) >= 0.5) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.low = std::max(lo, out.gw_bound);
  out.high = std::max(hi, out.low);
  out.stderr = curve.crossing_stderr;
  return out;
}

std::vector<LocalityEntry> locality_sweep(const Kernel& k, std::span<const double> truncations,
                                          const BetacSettings& settings) {
  for (std::size_t i = 1; i < truncations.size(); ++i) {
    require(truncations[i] > truncations[i - 1], ErrorCode::InvalidArgument, "truncation radii must increase");
  }
  std::vector<LocalityEntry> out;
  for (double n : truncations) out.push_back({n, betac_bracket(truncate(k, n), settings)});
  out.push_back({kInf, betac_bracket(k, settings)});
  return out;
}

// --- phi -----------------------------------------------------------------------------

PhiResult phi_value(const Kernel& k, double beta, std::span<const Point> s, const PhiMode& mode) {
  require(std::find(s.begin(), s.end(), Point{}) != s.end(), ErrorCode::OriginMissing, "S must contain the origin");
  if (mode.exact) require(s.size() <= 6, ErrorCode::TooLarge, "exact phi is limited to |S| <= 6");
  const std::size_t n = s.size();

  std::vector<double> conn(n, 1.0), conn_se(n, 0.0);
  if (mode.exact) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_zero(s[i])) conn[i] = exact_connect_oracle(k, beta, s, Point{}, s[i]);
    }
  } else {
    Point lo = s.front(), hi = s.front();
    for (const auto& p : s) {
      for (int i = 0; i < k.dim(); ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    }
    std::vector<ConnectionQuery> qs;
    std::vector<std::size_t> which;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_zero(s[i])) continue;
      qs.push_back({{s.begin(), s.end()}, Point{}, {s[i]}});
      which.push_back(i);
    }
    auto est = connection_probabilities_mc(k, beta, Region(k.dim(), lo, hi), qs, mode.replicates, mode.seed);
    for (std::size_t j = 0; j < which.size(); ++j) {
      conn[which[j]] = est[j].value;
      conn_se[which[j]] = est[j].stderr;
    }
  }

  // sum over y not in S of 1 - e^{-beta J(x - y)}: the full lattice sum minus the S terms.
  const double everything = open_mass(k, beta, 0.0);
  PhiResult res;
  res.exact = mode.exact;
  long double value = 0, var = 0;
  for (std::size_t i = 0; i < n; ++i) {
    long double outside = everything;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) outside -= open_probability(k, beta, s[i] - s[j]);
    }
    value += conn[i] * outside;
    var += conn_se[i] * conn_se[i] * outside * outside;
  }
  res.value = static_cast<double>(value);
  res.stderr = static_cast<double>(std::sqrt(var));
  constexpr double kTailTolerance = 1e-12;
  res.upper = res.value + (mode.exact ? kTailTolerance * static_cast<double>(n) : 4.0 * res.stderr);
  res.certified = res.upper < 1.0;
  return res;
}

}  // namespace lrp
