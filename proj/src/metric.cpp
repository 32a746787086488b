#include "lrp/metric.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "lrp/coupling.hpp"
#include "lrp/error.hpp"
#include "lrp/parallel.hpp"
#include "lrp/stats.hpp"

namespace lrp {

std::uint32_t DistanceField::eccentricity() const {
  std::uint32_t m = 0;
  for (auto d : dist_) {
    if (d != kUnreachable) m = std::max(m, d);
  }
  return m;
}

DistanceField bfs_distances(const BoxConfig& cfg, std::span<const std::uint32_t> sources, std::uint32_t max_depth) {
  require(!sources.empty(), ErrorCode::EmptySources, "BFS needs at least one source");
  std::vector<std::uint32_t> dist(cfg.vertex_count(), DistanceField::kUnreachable);
  std::vector<std::uint32_t> queue;
  queue.reserve(cfg.vertex_count());
  for (auto s : sources) {
    require(s < cfg.vertex_count(), ErrorCode::InvalidArgument, "source outside configuration");
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto v = queue[head];
    if (dist[v] >= max_depth) continue;
    for (auto w : cfg.neighbors(v)) {
      if (dist[w] == DistanceField::kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return DistanceField({sources.begin(), sources.end()}, std::move(dist));
}

std::string to_string(ProxyRule rule) {
  return rule == ProxyRule::LargestCluster ? "largest-cluster" : "boundary-touching";
}

Region enlarged_box(const Region& working) {
  Point lo = working.lo(), hi = working.hi();
  for (int i = 0; i < working.dim(); ++i) {
    const std::int64_t r = (working.extent(i) - 1) / 2;
    const std::int64_t grow = (r + 1) / 2;  // ceil(r / 2)
    lo[i] -= grow;
    hi[i] += grow;
  }
  return Region(working.dim(), lo, hi);
}

namespace {

unsigned faces_of(const Region& r, const Point& p) {
  unsigned m = 0;
  for (int i = 0; i < r.dim(); ++i) {
    if (p[i] == r.lo()[i]) m |= 1U << (2 * i);
    if (p[i] == r.hi()[i]) m |= 1U << (2 * i + 1);
  }
  return m;
}

}  // namespace

InfiniteClusterProxy make_proxy(const BoxConfig& cfg, const Region& working, ProxyRule rule) {
  InfiniteClusterProxy proxy;
  proxy.rule = rule;
  proxy.working = working;
  proxy.mask.assign(cfg.vertex_count(), 0);
  const auto n = static_cast<std::uint32_t>(cfg.vertex_count());
  if (n == 0) return proxy;
  ClusterForest forest(cfg);
  const unsigned all_faces = (1U << (2 * cfg.dim())) - 1;
  std::vector<unsigned> faces(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) faces[forest.root(v)] |= faces_of(cfg.region(), cfg.point(v));

  std::vector<char> chosen(n, 0);
  if (rule == ProxyRule::LargestCluster) {
    auto lc = largest_cluster(cfg, forest);
    const auto r = forest.root(lc.representative);
    proxy.spanning = faces[r] == all_faces && lc.size > 1;
    chosen[r] = proxy.spanning;
  } else {
    for (std::uint32_t v = 0; v < n; ++v) {
      if (forest.root(v) == v && faces[v] != 0 && forest.size_of(v) > 1) {
        chosen[v] = 1;
        if (faces[v] == all_faces) proxy.spanning = true;
      }
    }
    if (!proxy.spanning) std::fill(chosen.begin(), chosen.end(), 0);
  }
  Region inter = cfg.region().intersect(working);
  for (std::size_t i = 0; i < inter.size(); ++i) {
    const auto v = cfg.index(inter.point(i));
    if (chosen[forest.root(v)]) {
      proxy.vertices.push_back(v);
      proxy.mask[v] = 1;
    }
  }
  std::sort(proxy.vertices.begin(), proxy.vertices.end());
  return proxy;
}

InfiniteClusterProxy explicit_proxy(const BoxConfig& cfg, std::span<const Point> points) {
  InfiniteClusterProxy proxy;
  proxy.working = cfg.region();
  proxy.mask.assign(cfg.vertex_count(), 0);
  for (const auto& p : points) {
    require(cfg.region().contains(p), ErrorCode::InvalidArgument, "proxy point outside configuration");
    const auto v = cfg.index(p);
    if (!proxy.mask[v]) {
      proxy.mask[v] = 1;
      proxy.vertices.push_back(v);
    }
  }
  std::sort(proxy.vertices.begin(), proxy.vertices.end());
  proxy.spanning = !proxy.vertices.empty();
  return proxy;
}

std::uint32_t hat_point(const BoxConfig& cfg, const InfiniteClusterProxy& proxy, const Point& xd) {
  require(!proxy.empty(), ErrorCode::EmptyProxy, "infinite-cluster proxy is empty");
  const Region& reg = cfg.region();
  const int d = cfg.dim();
  std::int64_t far = 0;
  for (int i = 0; i < d; ++i) {
    far = std::max({far, std::abs(xd[i] - reg.lo()[i]), std::abs(xd[i] - reg.hi()[i])});
  }
  for (std::int64_t r = 0; r <= far; ++r) {
    Region shell = reg.intersect(Region::box(d, xd, r));
    bool found = false;
    Point best{};
    for (std::size_t i = 0; i < shell.size(); ++i) {
      const Point p = shell.point(i);
      if (norm_inf(p - xd) != r) continue;
      if (!proxy.mask[cfg.index(p)]) continue;
      if (!found || p < best) {
        best = p;
        found = true;
      }
    }
    if (found) return cfg.index(best);
  }
  fail(ErrorCode::EmptyProxy, "infinite-cluster proxy is empty");
}

std::uint32_t hat_point(const BoxConfig& cfg, const InfiniteClusterProxy& proxy, const RealPoint& x) {
  return hat_point(cfg, proxy, round_to_cell(x, cfg.dim()));
}

std::uint32_t dhat(const BoxConfig& cfg, const InfiniteClusterProxy& proxy, const Point& x, const Point& y) {
  const auto hx = hat_point(cfg, proxy, x);
  const auto hy = hat_point(cfg, proxy, y);
  if (hx == hy) return 0;
  const std::uint32_t src[] = {hx};
  return bfs_distances(cfg, src)[hy];
}

// Multi-source king-move BFS from the proxy. King-move distance is the
// infinity-norm distance inside a box, and the nearest sources of v are the
// union of those of its predecessors one step closer, so carrying the
// smallest label reproduces hat_point's lexicographic tie rule exactly.
std::vector<std::uint32_t> projection_map(const BoxConfig& cfg, const InfiniteClusterProxy& proxy) {
  require(!proxy.empty(), ErrorCode::EmptyProxy, "infinite-cluster proxy is empty");
  const Region& reg = cfg.region();
  const int d = cfg.dim();
  const std::size_t nv = cfg.vertex_count();
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> out(nv, kNone);
  std::vector<std::uint32_t> level;
  for (auto v : proxy.vertices) {
    out[v] = v;
    level.push_back(v);
  }
  std::vector<Point> steps;
  std::int64_t count = 1;
  for (int i = 0; i < d; ++i) count *= 3;
  for (std::int64_t c = 0; c < count; ++c) {
    Point st{};
    std::int64_t rest = c;
    for (int i = 0; i < d; ++i, rest /= 3) st[i] = rest % 3 - 1;
    if (!is_zero(st)) steps.push_back(st);
  }
  std::vector<std::uint32_t> next, round(nv, 0);
  for (std::uint32_t r = 1; !level.empty(); ++r) {
    next.clear();
    for (auto v : level) {
      const Point p = cfg.point(v);
      for (const auto& st : steps) {
        const Point q = p + st;
        if (!reg.contains(q)) continue;
        const auto w = cfg.index(q);
        if (out[w] == kNone) {
          next.push_back(w);
          round[w] = r;
          out[w] = out[v];
        } else if (round[w] == r) {
          if (cfg.point(out[v]) < cfg.point(out[w])) out[w] = out[v];
        }
      }
    }
    level.swap(next);
  }
  return out;
}

std::vector<std::uint32_t> chemical_ball(const BoxConfig& cfg, const InfiniteClusterProxy& proxy, const Point& center,
                                         std::uint32_t t) {
  const std::uint32_t src[] = {hat_point(cfg, proxy, center)};
  auto field = bfs_distances(cfg, src, t);
  const auto hat = projection_map(cfg, proxy);
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < cfg.vertex_count(); ++v) {
    if (field[hat[v]] <= t) out.push_back(v);
  }
  return out;
}

ClusterDistance max_cluster_distance(const BoxConfig& cfg, std::span<const std::uint32_t> a) {
  require(!a.empty(), ErrorCode::EmptySet, "max_cluster_distance of an empty set");
  ClusterForest forest(cfg);
  std::vector<std::uint32_t> verts(a.begin(), a.end());
  std::sort(verts.begin(), verts.end());
  verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
  std::stable_sort(verts.begin(), verts.end(), [&](auto x, auto y) { return forest.root(x) < forest.root(y); });

  ClusterDistance best;
  constexpr auto kInf = DistanceField::kUnreachable;
  for (std::size_t lo = 0; lo < verts.size();) {
    std::size_t hi = lo;
    while (hi < verts.size() && forest.root(verts[hi]) == forest.root(verts[lo])) ++hi;
    std::vector<std::uint32_t> group(verts.begin() + static_cast<std::ptrdiff_t>(lo),
                                     verts.begin() + static_cast<std::ptrdiff_t>(hi));
    lo = hi;
    if (group.size() < 2) continue;
    // Eccentricity bounds restricted to the group (Takes-Kosters style).
    const std::size_t g = group.size();
    std::vector<std::uint32_t> lower(g, 0), upper(g, kInf);
    std::vector<char> alive(g, 1);
    std::size_t remaining = g;
    bool pick_upper = true;
    while (remaining > 0) {
      std::size_t pick = g;
      for (std::size_t i = 0; i < g; ++i) {
        if (!alive[i]) continue;
        if (pick == g || (pick_upper ? upper[i] > upper[pick] : lower[i] < lower[pick])) pick = i;
      }
      pick_upper = !pick_upper;
      const std::uint32_t src[] = {group[pick]};
      auto field = bfs_distances(cfg, src);
      std::uint32_t ecc = 0;
      std::uint32_t far = group[pick];
      for (auto w : group) {
        if (field[w] > ecc) {
          ecc = field[w];
          far = w;
        }
      }
      if (ecc > best.distance) best = {ecc, std::min(group[pick], far), std::max(group[pick], far)};
      alive[pick] = 0;
      --remaining;
      for (std::size_t i = 0; i < g; ++i) {
        if (!alive[i]) continue;
        const std::uint32_t d = field[group[i]];
        lower[i] = std::max({lower[i], d, ecc > d ? ecc - d : 0U});
        upper[i] = std::min(upper[i], ecc + d);
        if (upper[i] <= best.distance) {
          alive[i] = 0;
          --remaining;
        }
      }
    }
  }
  return best;
}

TailProbe distance_tail_probe(const ConfigSource& source, int dim, std::int64_t n, double factor,
                              std::size_t replicates, std::uint64_t seed, unsigned workers) {
  require(n >= 1 && factor > 0, ErrorCode::InvalidArgument, "need n >= 1 and a positive factor");
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  const Region box = Region::box(dim, Point{}, n);
  const Region enlarged = enlarged_box(box);
  auto reps = parallel_map<double>(
      replicates,
      [&](std::size_t r) {
        auto cfg = source(enlarged, derive_seed(seed, r));
        ClusterForest forest(cfg);
        const auto big = largest_cluster(cfg, forest);
        std::vector<std::uint32_t> a;
        for (auto v : region_vertices(cfg, box)) {
          if (forest.connected(v, big.representative)) a.push_back(v);
        }
        if (a.empty()) return 0.0;
        return static_cast<double>(max_cluster_distance(cfg, a).distance);
      },
      workers);
  std::vector<double> hits(reps.size());
  TailProbe out;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    hits[i] = reps[i] > factor * static_cast<double>(n) ? 1.0 : 0.0;
    out.mean_distance += reps[i] / static_cast<double>(n);
  }
  out.mean_distance /= static_cast<double>(reps.size());
  out.frequency = make_estimate(hits, seed, "mc-max-cluster-distance");
  return out;
}

Estimate far_pair_probe(const ConfigSource& source, int dim, std::int64_t n, std::int64_t inner, std::int64_t window,
                        std::size_t replicates, std::uint64_t seed, unsigned workers) {
  require(inner >= 0 && window >= inner, ErrorCode::InvalidArgument, "need 0 <= inner <= window");
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  const Region win = Region::box(dim, Point{}, window);
  const Region core = Region::box(dim, Point{}, inner);
  auto hits = parallel_map<double>(
      replicates,
      [&](std::size_t r) {
        auto cfg = source(win, derive_seed(seed, r));
        const auto pts = region_vertices(cfg, core);
        for (auto x : pts) {
          const std::uint32_t src[] = {x};
          auto f = bfs_distances(cfg, src);
          for (auto y : pts) {
            if (f.reachable(y) && static_cast<std::int64_t>(f[y]) > n) return 1.0;
          }
        }
        return 0.0;
      },
      workers);
  return make_estimate(hits, seed, "mc-far-pair");
}

// --- mu sequence --------------------------------------------------------------

std::vector<MuRow> mu_sequence(const ConfigSource& source, int dim, const Point& direction,
                               std::span<const std::int64_t> n_values, std::size_t replicates, std::uint64_t seed,
                               const MuOptions& options) {
  require(!is_zero(direction), ErrorCode::ZeroDisplacement, "mu direction must be nonzero");
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  std::vector<MuRow> rows;
  for (auto n : n_values) {
    require(n >= 1, ErrorCode::InvalidArgument, "n must be positive");
    const Point nx = n * direction;
    const Point two_nx = (2 * n) * direction;
    const std::int64_t radius = n * norm_inf(direction) + options.margin;
    const Region working = Region::box(dim, nx, radius);
    const Region enlarged = enlarged_box(working);

    struct Rep {
      bool empty = true;
      double ratio = 0.0;
      bool violation = false;
    };
    auto reps = parallel_map<Rep>(
        replicates,
        [&](std::size_t r) {
          Rep rep;
          auto cfg = source(enlarged, derive_seed(seed, r));
          auto proxy = make_proxy(cfg, working, options.rule);
          if (proxy.empty()) return rep;
          rep.empty = false;
          const auto h0 = hat_point(cfg, proxy, Point{});
          const auto h1 = hat_point(cfg, proxy, nx);
          const auto h2 = hat_point(cfg, proxy, two_nx);
          const std::uint32_t s0[] = {h0};
          const std::uint32_t s1[] = {h1};
          auto f0 = bfs_distances(cfg, s0);
          auto f1 = bfs_distances(cfg, s1);
          const std::uint64_t d01 = f0[h1], d02 = f0[h2], d12 = f1[h2];
          rep.ratio = static_cast<double>(d01) / static_cast<double>(n);
          if (d01 == DistanceField::kUnreachable) rep.ratio = std::numeric_limits<double>::infinity();
          rep.violation = d02 > d01 + d12;
          return rep;
        },
        options.workers);

    MuRow row;
    row.n = n;
    row.seed = seed;
    for (const auto& rep : reps) {
      if (rep.empty) {
        ++row.empty_proxies;
        continue;
      }
      row.ratios.push_back(rep.ratio);
      row.subadditivity_violations += rep.violation;
    }
    require(2 * row.empty_proxies <= replicates, ErrorCode::SubcriticalRegime,
            "infinite-cluster proxy empty in a majority of replicates at n=" + std::to_string(n));
    auto s = summarize(row.ratios);
    row.mean = s.mean;
    row.stderr = s.stderr;
    row.replicates = row.ratios.size();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<MuRow> mu_sequence(const Kernel& k, double beta, const Point& direction,
                               std::span<const std::int64_t> n_values, std::size_t replicates, std::uint64_t seed,
                               const MuOptions& options) {
  return mu_sequence(kernel_source(k, beta), k.dim(), direction, n_values, replicates, seed, options);
}

// --- shape ----------------------------------------------------------------------

MuTable::MuTable(int dim, std::vector<double> axis, double diagonal)
    : dim_(dim), axis_(std::move(axis)), diagonal_(diagonal) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::DimensionMismatch, "bad dimension for mu table");
  require(axis_.size() == static_cast<std::size_t>(dim), ErrorCode::DimensionMismatch, "one mu value per axis");
  for (double m : axis_) require(m > 0.0 && std::isfinite(m), ErrorCode::DegenerateNorm, "mu must be positive");
  require(diagonal_ > 0.0 && std::isfinite(diagonal_), ErrorCode::DegenerateNorm, "mu must be positive");
  for (int i = 0; i < dim; ++i) {
    for (double sgn : {1.0, -1.0}) {
      RealPoint v{};
      v[static_cast<std::size_t>(i)] = sgn / axis_[static_cast<std::size_t>(i)];
      vertices_.push_back(v);
    }
  }
  if (dim > 1) {
    for (int mask = 0; mask < (1 << dim); ++mask) {
      RealPoint v{};
      for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] = ((mask >> i) & 1 ? -1.0 : 1.0) / diagonal_;
      vertices_.push_back(v);
    }
  }
}

namespace {

// Solves the dim x dim system cols * lambda = y by Gaussian elimination.
bool solve_small(int dim, const std::vector<RealPoint>& cols, const RealPoint& y, RealPoint& lambda) {
  double a[kMaxDim][kMaxDim + 1];
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) a[r][c] = cols[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)];
    a[r][dim] = y[static_cast<std::size_t>(r)];
  }
  for (int c = 0; c < dim; ++c) {
    int piv = c;
    for (int r = c + 1; r < dim; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-12) return false;
    std::swap(a[c], a[piv]);
    for (int r = 0; r < dim; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int k = c; k <= dim; ++k) a[r][k] -= f * a[c][k];
    }
  }
  for (int r = 0; r < dim; ++r) lambda[static_cast<std::size_t>(r)] = a[r][dim] / a[r][r];
  return true;
}

}  // namespace

double MuTable::norm(const RealPoint& y) const {
  bool zero = true;
  for (int i = 0; i < dim_; ++i) zero = zero && y[static_cast<std::size_t>(i)] == 0.0;
  if (zero) return 0.0;
  // Gauge of the hull: the LP min sum(lambda), V lambda = y, lambda >= 0 is
  // attained on a basis of dim vertices.
  const std::size_t nv = vertices_.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim_));
  std::vector<RealPoint> cols(static_cast<std::size_t>(dim_));
  auto rec = [&](auto&& self, std::size_t pos, std::size_t start) -> void {
    if (pos == idx.size()) {
      for (std::size_t i = 0; i < idx.size(); ++i) cols[i] = vertices_[idx[i]];
      RealPoint lambda{};
      if (!solve_small(dim_, cols, y, lambda)) return;
      double sum = 0.0;
      for (int i = 0; i < dim_; ++i) {
        if (lambda[static_cast<std::size_t>(i)] < -1e-12) return;
        sum += lambda[static_cast<std::size_t>(i)];
      }
      best = std::min(best, sum);
      return;
    }
    for (std::size_t v = start; v < nv; ++v) {
      idx[pos] = v;
      self(self, pos + 1, v + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

double MuTable::norm(const Point& y) const {
  RealPoint r{};
  for (int i = 0; i < dim_; ++i) r[static_cast<std::size_t>(i)] = static_cast<double>(y[i]);
  return norm(r);
}

ShapeReport shape_check(std::span<const Point> ball, std::uint32_t t, const MuTable& mu, double eps) {
  require(t > 0, ErrorCode::InvalidArgument, "shape check needs t > 0");
  const int d = mu.dim();
  const double tt = static_cast<double>(t);
  ShapeReport rep;
  std::unordered_set<Point, PointHash> members;
  for (const auto& z : ball) {
    members.insert(z);
    const double e = mu.norm(z) / tt - 1.0;
    if (e > rep.eps_out) {
      rep.eps_out = e;
      if (e > rep.violation) {
        rep.violation = e;
        rep.worst = z;
        rep.side = "outer";
      }
    }
  }
  // Window containing t B_mu.
  Point lo{}, hi{};
  for (int i = 0; i < d; ++i) {
    const double reach = std::max(1.0 / mu.axis(i), 1.0 / mu.diagonal());
    const auto r = static_cast<std::int64_t>(std::ceil(tt * reach)) + 1;
    lo[i] = -r;
    hi[i] = r;
  }
  Region window(d, lo, hi);
  for (std::size_t i = 0; i < window.size(); ++i) {
    const Point z = window.point(i);
    if (members.count(z)) continue;
    const double e = 1.0 - mu.norm(z) / tt;
    if (e > rep.eps_in) {
      rep.eps_in = e;
      if (e > rep.violation) {
        rep.violation = e;
        rep.worst = z;
        rep.side = "inner";
      }
    }
  }
  rep.pass = rep.violation <= eps;
  return rep;
}

}  // namespace lrp
