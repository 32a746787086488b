#include "lrp/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "lrp/cluster.hpp"
#include "lrp/coupling.hpp"
#include "lrp/error.hpp"
#include "lrp/parallel.hpp"

namespace lrp {

namespace {

std::vector<char> mask_of(std::size_t n, std::span<const std::uint32_t> set) {
  std::vector<char> m(n, 0);
  for (auto v : set) m[v] = 1;
  return m;
}

// Multi-source BFS over open edges, staying inside `allowed`.
std::vector<std::uint32_t> reach(const BoxConfig& cfg, std::span<const std::uint32_t> sources,
                                 const std::vector<char>& allowed) {
  std::vector<char> seen(cfg.vertex_count(), 0);
  std::vector<std::uint32_t> queue;
  for (auto s : sources) {
    if (allowed[s] && !seen[s]) {
      seen[s] = 1;
      queue.push_back(s);
    }
  }
  for (std::size_t h = 0; h < queue.size(); ++h) {
    for (auto w : cfg.neighbors(queue[h])) {
      if (allowed[w] && !seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return queue;
}

double to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

// --- annulus pads -------------------------------------------------------------------

Estimate annulus_pad_probe(const ConfigSource& source, int dim, std::int64_t n, std::int64_t m, double delta,
                           std::size_t replicates, std::uint64_t seed, unsigned workers) {
  require(delta > 0.0 && delta <= 1.0, ErrorCode::InvalidArgument, "delta must lie in (0, 1]");
  require(n >= 1 && m >= 0, ErrorCode::InvalidArgument, "need n >= 1 and m >= 0");
  require(static_cast<double>(m) < delta * static_cast<double>(n) / 3.0, ErrorCode::GeometryInfeasible,
          "pads do not fit in the annulus: need m < delta n / 3");
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  const auto outer_radius = static_cast<std::int64_t>(std::floor((1.0 + delta) * static_cast<double>(n)));
  const Region outer = Region::box(dim, Point{}, outer_radius);
  const Region inner = Region::box(dim, Point{}, n);

  auto hits = parallel_map<double>(
      replicates,
      [&](std::size_t r) {
        auto cfg = source(outer, derive_seed(seed, r));
        auto inner_v = region_vertices(cfg, inner);
        auto seeds = region_vertices(cfg, Region::box(dim, Point{}, m));
        auto cluster = reach(cfg, seeds, mask_of(cfg.vertex_count(), inner_v));

        std::vector<std::uint32_t> annulus;
        for (std::uint32_t v = 0; v < cfg.vertex_count(); ++v) {
          if (!inner.contains(cfg.point(v))) annulus.push_back(v);
        }
        std::vector<char> in_pad(cfg.vertex_count(), 0);
        for (const auto& c : find_mpads(cfg, annulus, m)) {
          for (auto v : region_vertices(cfg, Region::box(dim, c, m))) in_pad[v] = 1;
        }
        for (auto v : cluster) {
          for (auto w : cfg.neighbors(v)) {
            if (in_pad[w]) return 1.0;
          }
        }
        return 0.0;
      },
      workers);
  return make_estimate(hits, seed, "mc-annulus-pad");
}

Estimate annulus_pad_probe(const Kernel& k, double beta, std::int64_t n, std::int64_t m, double delta,
                           std::size_t replicates, std::uint64_t seed, unsigned workers) {
  return annulus_pad_probe(kernel_source(k, beta), k.dim(), n, m, delta, replicates, seed, workers);
}

PadCalibration calibrate_pads(const Kernel& k, double beta, std::span<const std::pair<std::int64_t, std::int64_t>> nm,
                              double delta, double target, std::size_t replicates, std::uint64_t seed,
                              unsigned workers) {
  require(!nm.empty(), ErrorCode::InvalidArgument, "no calibration candidates");
  PadCalibration out;
  for (auto [n, m] : nm) {
    out = {n, m, delta, annulus_pad_probe(k, beta, n, m, delta, replicates, seed, workers), false};
    out.reached = out.probe.value >= target;
    if (out.reached) break;
  }
  return out;
}

// --- directed exploration ---------------------------------------------------------------

namespace {

using Quad = std::pair<std::int64_t, std::int64_t>;

Point embed(const Quad& u) {
  Point p{};
  p[0] = u.first;
  p[1] = u.second;
  return p;
}

struct Link {
  Point from;
  bool sprinkled = false;  // reached over a sprinkling edge from R (else a base edge inside X)
};

// One pass (u, i): X, the links that built it, and the pad found (if any).
struct PassRecord {
  std::unordered_map<Point, Link, PointHash> links;
  std::vector<Point> x;
  std::optional<Point> pad;
  std::uint32_t stream = 0;
};

class Explorer {
 public:
  Explorer(const StreamSource& source, int dim, const ExplorationParams& p) : source_(source), dim_(dim), p_(p) {
    cap_ = p.max_edge == 0 ? 14 * p.n : p.max_edge;
  }

  ExplorationResult run(const std::function<bool(const Point&, const Point&, std::uint32_t)>& verify) {
    ExplorationResult res;
    const std::int64_t n = p_.n;
    {
      ExplorationStep step{0, 0, 0, 0};
      auto cfg = fetch(rect(Quad{0, 0}, 0), kStreamBase, 0, 1, res, step);
      const bool pad = is_mpad(cfg, Point{}, p_.m);
      std::vector<Point> a0;
      if (pad) {
        a0.push_back(Point{});
        for (std::size_t i = 0; i < Region::box(dim_, Point{}, p_.m).size(); ++i)
          r1_[Quad{0, 0}].push_back(Region::box(dim_, Point{}, p_.m).point(i));
      }
      step.active = a0.size();
      res.trace.push_back(step);
      res.active.push_back(a0);
      if (!pad) return res;
      res.survival_depth = 0;
    }

    std::vector<Quad> level{{0, 0}};
    for (int k = 1; k <= p_.depth && !level.empty(); ++k) {
      ExplorationStep step{k, 0, 0, 0};
      std::vector<Quad> next;
      std::set<Quad> declared;
      // pass 1: towards u + e_1
      for (const auto& u : level) {
        const Quad t{u.first + 1, u.second};
        declared.insert(t);
        auto& rec = pass(u, 0, r1_[u], k, res, step);
        if (rec.pad) {
          next.push_back(t);
          parent_[t] = {u, 0};
          r1_[t] = within(rec.x, Region::box(dim_, (8 * n) * embed(t), 3 * n));
        }
      }
      // pass 2: towards u + e_2, unless declared in pass 1
      for (const auto& u : level) {
        const Quad t{u.first, u.second + 1};
        if (declared.count(t)) continue;
        std::vector<Point> r2 = r1_[u];
        const auto& x1 = records_.at({u, 0}).x;
        r2.insert(r2.end(), x1.begin(), x1.end());
        r2 = within(r2, Region::box(dim_, (8 * n) * embed(u), 3 * n));
        auto& rec = pass(u, 1, r2, k, res, step);
        if (rec.pad) {
          next.push_back(t);
          parent_[t] = {u, 1};
          r1_[t] = within(rec.x, Region::box(dim_, (8 * n) * embed(t), 3 * n));
        }
      }
      std::sort(next.begin(), next.end());
      step.active = next.size();
      res.trace.push_back(step);
      std::vector<Point> pts;
      for (const auto& t : next) pts.push_back(embed(t));
      res.active.push_back(pts);
      if (!next.empty()) res.survival_depth = k;
      level = std::move(next);
    }
    res.certificate = certify(res, verify);
    return res;
  }

 private:
  // M_i^u: extent {-3n..11n} along axis i, {-3n..3n} elsewhere, shifted by 8nu.
  Region rect(const Quad& u, int axis) const {
    const std::int64_t n = p_.n;
    Point lo{}, hi{};
    for (int j = 0; j < dim_; ++j) {
      lo[j] = -3 * n;
      hi[j] = j == axis ? 11 * n : 3 * n;
    }
    const Point shift = (8 * n) * embed(u);
    return Region(dim_, lo + shift, hi + shift);
  }

  std::vector<Point> within(const std::vector<Point>& pts, const Region& r) const {
    std::vector<Point> out;
    for (const auto& p : pts) {
      if (r.contains(p)) out.push_back(p);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  BoxConfig fetch(const Region& r, std::uint32_t stream, int k, int phase, ExplorationResult& res,
                  ExplorationStep& step) {
    res.access.push_back({k, phase, stream});
    auto cfg = source_(r, stream);
    if (cap_ < 14 * p_.n) cfg = cfg.filter_max_length(cap_);
    ++step.blocks_sampled;
    step.edges_drawn += cfg.edge_count();
    return cfg;
  }

  PassRecord& pass(const Quad& u, int axis, const std::vector<Point>& r, int k, ExplorationResult& res,
                   ExplorationStep& step) {
    const std::int64_t n = p_.n;
    const std::uint32_t stream = axis == 0 ? kStreamSprinkleA : kStreamSprinkleB;
    const Region m_rect = rect(u, axis);
    auto base = fetch(m_rect, kStreamBase, k, axis + 1, res, step);
    auto sprinkle = fetch(m_rect, stream, k, axis + 1, res, step);

    PassRecord rec;
    rec.stream = stream;
    std::vector<char> in_r(base.vertex_count(), 0);
    std::vector<std::uint32_t> r_idx;
    for (const auto& p : r) {
      r_idx.push_back(base.index(p));
      in_r[r_idx.back()] = 1;
    }
    std::sort(r_idx.begin(), r_idx.end());
    // R_+: one sprinkled edge out of R
    std::vector<std::uint32_t> frontier;
    std::vector<char> seen(base.vertex_count(), 0);
    for (auto v : r_idx) {
      for (auto w : sprinkle.neighbors(v)) {
        if (in_r[w] || seen[w]) continue;
        seen[w] = 1;
        frontier.push_back(w);
        rec.links[base.point(w)] = {base.point(v), true};
      }
    }
    // X: the base-cluster of R_+ inside M \ R
    for (std::size_t h = 0; h < frontier.size(); ++h) {
      for (auto w : base.neighbors(frontier[h])) {
        if (in_r[w] || seen[w]) continue;
        seen[w] = 1;
        frontier.push_back(w);
        rec.links[base.point(w)] = {base.point(frontier[h]), false};
      }
    }
    const Quad t = axis == 0 ? Quad{u.first + 1, u.second} : Quad{u.first, u.second + 1};
    const Region target = Region::box(dim_, (8 * n) * embed(t), n);
    std::vector<std::uint32_t> in_target;
    for (auto v : frontier) {
      rec.x.push_back(base.point(v));
      if (target.contains(base.point(v))) in_target.push_back(v);
    }
    std::sort(rec.x.begin(), rec.x.end());
    auto pads = find_mpads(base, in_target, p_.m);
    if (!pads.empty()) rec.pad = pads.front();
    auto [it, _] = records_.insert_or_assign({u, axis}, std::move(rec));
    return it->second;
  }

  PathCertificate certify(const ExplorationResult& res,
                          const std::function<bool(const Point&, const Point&, std::uint32_t)>& verify) const {
    PathCertificate cert;
    const auto& deepest = res.active[static_cast<std::size_t>(res.survival_depth)];
    if (res.survival_depth == 0) {
      cert.verified = true;
      cert.target = Point{};
      return cert;
    }
    const Quad top{deepest.front()[0], deepest.front()[1]};
    auto [u, axis] = parent_.at(top);
    const auto& last = records_.at({u, axis});
    cert.target = *last.pad;

    std::vector<std::pair<Point, Point>> rev;
    std::vector<std::uint32_t> rev_streams;
    Point cur = cert.target;
    const Region origin_pad = Region::box(dim_, Point{}, p_.m);
    for (std::size_t guard = 0;; ++guard) {
      if (guard > 100'000'000) {
        cert.failure = "path replay did not terminate";
        return cert;
      }
      const auto& rec = records_.at({u, axis});
      auto it = rec.links.find(cur);
      if (it == rec.links.end()) {
        cert.failure = "vertex " + to_string(cur, dim_) + " not reached in its pass";
        return cert;
      }
      rev.push_back({it->second.from, cur});
      rev_streams.push_back(it->second.sprinkled ? rec.stream : kStreamBase);
      cur = it->second.from;
      if (!it->second.sprinkled) continue;
      // cur is in R of this pass: either X_1^u (second pass) or R_1^u
      if (axis == 1 && records_.at({u, 0}).links.count(cur)) {
        axis = 0;
        continue;
      }
      if (u == Quad{0, 0}) {
        if (!origin_pad.contains(cur)) {
          cert.failure = "replay left the origin block outside B_m(0)";
          return cert;
        }
        break;
      }
      std::tie(u, axis) = parent_.at(u);
    }
    std::reverse(rev.begin(), rev.end());
    std::reverse(rev_streams.begin(), rev_streams.end());
    cert.edges = rev;
    cert.streams = rev_streams;
    for (std::size_t i = 0; i < rev.size(); ++i) {
      const auto [a, b] = rev[i];
      const auto len = norm_inf(a - b);
      cert.longest = std::max(cert.longest, len);
      if (len > 14 * p_.n || len > cap_) {
        cert.failure = "edge longer than the cap";
        return cert;
      }
      if (i > 0 && rev[i - 1].second != a) {
        cert.failure = "path is not contiguous";
        return cert;
      }
      if (verify && !verify(a, b, rev_streams[i])) {
        cert.failure = "edge " + to_string(a, dim_) + " - " + to_string(b, dim_) + " is not open in its stream";
        return cert;
      }
    }
    cert.verified = true;
    return cert;
  }

  const StreamSource& source_;
  int dim_;
  ExplorationParams p_;
  std::int64_t cap_ = 0;
  std::map<Quad, std::vector<Point>> r1_;
  std::map<Quad, std::pair<Quad, int>> parent_;
  std::map<std::pair<Quad, int>, PassRecord> records_;
};

}  // namespace

ExplorationResult directed_exploration(const StreamSource& source, int dim, const ExplorationParams& params,
                                       const std::function<bool(const Point&, const Point&, std::uint32_t)>& verify) {
  require(dim >= 2, ErrorCode::GeometryInfeasible, "the exploration needs d >= 2");
  require(params.n >= 1 && params.m >= 0 && params.m <= params.n, ErrorCode::GeometryInfeasible,
          "need n >= 1 and 0 <= m <= n so pads fit in their blocks");
  require(params.max_edge >= 0 && params.max_edge <= 14 * params.n, ErrorCode::GeometryInfeasible,
          "edge cap N must satisfy N <= 14n");
  require(params.depth >= 0, ErrorCode::InvalidArgument, "depth must be >= 0");
  std::function<bool(const Point&, const Point&, std::uint32_t)> check = verify;
  if (!check) {
    check = [&](const Point& a, const Point& b, std::uint32_t stream) {
      Point lo{}, hi{};
      for (int i = 0; i < dim; ++i) {
        lo[i] = std::min(a[i], b[i]);
        hi[i] = std::max(a[i], b[i]);
      }
      auto cfg = source(Region(dim, lo, hi), stream);
      return cfg.has_edge(cfg.index(a), cfg.index(b));
    };
  }
  Explorer ex(source, dim, params);
  return ex.run(check);
}

namespace {

std::pair<double, double> resolve_split(double beta, const ExplorationParams& p) {
  const double bt = std::isnan(p.beta_tilde) ? 0.75 * beta : p.beta_tilde;
  const double eta = std::isnan(p.eta) ? 0.125 * beta : p.eta;
  require(bt >= 0.0 && eta >= 0.0 && std::abs(bt + 2.0 * eta - beta) <= 1e-12 * std::max(1.0, beta),
          ErrorCode::SplitInvalid, "split must satisfy beta_tilde + 2 eta = beta");
  require(beta == 0.0 || (bt > 0.0 && eta > 0.0), ErrorCode::SplitInvalid, "need beta > beta_tilde > 0");
  return {bt, eta};
}

}  // namespace

ExplorationResult directed_exploration(const Kernel& k, double beta, const ExplorationParams& params,
                                       std::uint64_t seed) {
  const auto [bt, eta] = resolve_split(beta, params);
  SampleOptions exact;
  exact.exact = true;
  StreamSource source = [&, bt = bt, eta = eta](const Region& r, std::uint32_t stream) {
    return sample_region(k, stream == kStreamBase ? bt : eta, r, CouplingField{seed, stream}, exact);
  };
  auto verify = [&, bt = bt, eta = eta](const Point& a, const Point& b, std::uint32_t stream) {
    return edge_open(CouplingField{seed, stream}, a, b, stream == kStreamBase ? bt : eta, k);
  };
  auto res = directed_exploration(source, k.dim(), params, verify);
  res.beta_tilde = bt;
  res.eta = eta;
  return res;
}

ExplorationSummary exploration_survival(const Kernel& k, double beta, const ExplorationParams& params,
                                        std::size_t replicates, std::uint64_t seed, unsigned workers) {
  resolve_split(beta, params);
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  struct One {
    int depth = -1;
    bool certified = false;
    std::int64_t longest = 0;
  };
  auto runs = parallel_map<One>(
      replicates,
      [&](std::size_t r) {
        auto res = directed_exploration(k, beta, params, derive_seed(seed, r));
        One o;
        o.depth = res.survival_depth;
        if (res.certificate) {
          o.certified = res.certificate->verified;
          o.longest = res.certificate->longest;
        }
        return o;
      },
      workers);
  ExplorationSummary s;
  std::vector<double> alive;
  double depth_sum = 0;
  for (const auto& o : runs) {
    const bool survived = o.depth >= params.depth;
    alive.push_back(survived ? 1.0 : 0.0);
    s.depths.push_back(o.depth);
    depth_sum += o.depth;
    if (survived) {
      ++s.survived;
      if (o.certified) ++s.certified;
      s.longest_edge = std::max(s.longest_edge, o.longest);
    }
  }
  s.survival = make_estimate(alive, seed, "mc-directed-exploration");
  s.mean_depth = depth_sum / static_cast<double>(replicates);
  return s;
}

// --- directed site-bond model ----------------------------------------------------------

Estimate directed_survival(const DirectedModel& model, int depth, std::size_t replicates, std::uint64_t seed,
                           unsigned workers) {
  require(model.rho >= 0.0 && model.rho <= 1.0, ErrorCode::InvalidArgument, "rho must lie in [0, 1]");
  require(depth >= 0 && replicates > 0, ErrorCode::InvalidArgument, "need depth >= 0 and replicates > 0");
  auto q = [&](std::int64_t a, std::int64_t b, int i) { return model.q ? model.q(a, b, i) : model.rho; };
  auto alive = parallel_map<double>(
      replicates,
      [&](std::size_t r) {
        const std::uint64_t rs = derive_seed(seed, r);
        // active[a] for the level-k vertex (a, k - a)
        std::vector<char> active{1};
        for (int k = 1; k <= depth; ++k) {
          std::vector<char> next(static_cast<std::size_t>(k) + 1, 0);
          const auto limit = model.width > 0 ? std::min<std::int64_t>(model.width, k + 1) : k + 1;
          bool any = false;
          for (std::int64_t a = 0; a < static_cast<std::int64_t>(active.size()); ++a) {
            if (!active[static_cast<std::size_t>(a)]) continue;
            const std::int64_t b = k - 1 - a;
            const auto key = derive_seed(rs, static_cast<std::uint64_t>(k) << 32 | static_cast<std::uint64_t>(a));
            // e_1 pass; the target (a + 1, b) is open or dead
            if (a + 1 < limit && to_unit(derive_seed(key, 1)) < q(a, b, 0)) next[static_cast<std::size_t>(a) + 1] = 1;
            // e_2 pass: (a, b + 1) was declared in the e_1 pass iff (a - 1, b + 1) was active
            const bool declared = a > 0 && active[static_cast<std::size_t>(a) - 1];
            if (!declared && a < limit && to_unit(derive_seed(key, 2)) < q(a, b, 1)) next[static_cast<std::size_t>(a)] = 1;
          }
          for (auto v : next) any |= v != 0;
          if (!any) return 0.0;
          active = std::move(next);
        }
        return 1.0;
      },
      workers);
  return make_estimate(alive, seed, "mc-directed-survival");
}

double directed_survival_exact(double rho, int depth, int width) {
  require(width >= 1 && width <= 20, ErrorCode::InvalidArgument, "width must lie in [1, 20]");
  require(rho >= 0.0 && rho <= 1.0 && depth >= 0, ErrorCode::InvalidArgument, "need rho in [0,1] and depth >= 0");
  const std::size_t states = std::size_t{1} << width;
  std::vector<long double> law(states, 0.0L), next(states);
  law[1] = 1.0L;  // only a = 0 active
  for (int k = 1; k <= depth; ++k) {
    std::fill(next.begin(), next.end(), 0.0L);
    for (std::size_t s = 1; s < states; ++s) {
      if (law[s] == 0.0L) continue;
      // independent draws: for each active a, an e_1 draw (kept when a + 1 < width)
      // and an e_2 draw unless a - 1 is active
      std::vector<long double> dist{law[s]};
      std::vector<std::size_t> outcome{0};
      for (int a = 0; a < width; ++a) {
        if (!((s >> a) & 1)) continue;
        auto draw = [&](std::size_t bit) {
          std::vector<long double> d2;
          std::vector<std::size_t> o2;
          for (std::size_t j = 0; j < dist.size(); ++j) {
            d2.push_back(dist[j] * rho);
            o2.push_back(outcome[j] | bit);
            d2.push_back(dist[j] * (1.0L - rho));
            o2.push_back(outcome[j]);
          }
          dist = std::move(d2);
          outcome = std::move(o2);
        };
        if (a + 1 < width) draw(std::size_t{1} << (a + 1));
        if (!(a > 0 && ((s >> (a - 1)) & 1))) draw(std::size_t{1} << a);
      }
      for (std::size_t j = 0; j < dist.size(); ++j) next[outcome[j]] += dist[j];
    }
    next[0] = 0.0L;  // extinct mass is dropped
    law.swap(next);
  }
  long double alive = 0;
  for (std::size_t s = 1; s < states; ++s) alive += law[s];
  return static_cast<double>(alive);
}

// --- depth without pads ------------------------------------------------------------------

namespace {

struct DepthRun {
  bool event = false;
  std::size_t boxes = 0;
  bool clipped = false;  // explored vertices came too close to the window edge
};

DepthRun explore_depth(const BoxConfig& cfg_r, const BoxConfig& cfg_n, std::int64_t k, std::int64_t kside,
                       double threshold, std::int64_t window) {
  DepthRun out;
  const int dim = cfg_r.dim();
  std::vector<std::uint32_t> dist(cfg_r.vertex_count(), UINT32_MAX);
  const auto origin = cfg_r.index(Point{});
  dist[origin] = 0;
  std::vector<std::uint32_t> layer{origin};
  std::size_t count = 1;
  std::set<Point> explored;
  auto note = [&](std::uint32_t v) { out.clipped |= 2 * norm_inf(cfg_r.point(v)) > window; };
  note(origin);

  const std::int64_t half = k / 2;
  for (std::int64_t i = 0; !layer.empty(); ++i) {
    if (i <= half) {
      // fresh K-boxes met by this layer; y_u is the lexicographically smallest layer vertex in the box
      std::map<Point, Point> fresh;
      for (auto v : layer) {
        const Point x = cfg_r.point(v);
        Point u{};
        for (int j = 0; j < dim; ++j) u[j] = floor_div(x[j], kside);
        if (explored.count(u)) continue;
        auto [it, inserted] = fresh.emplace(u, x);
        if (!inserted && x < it->second) it->second = x;
      }
      for (const auto& [u, y] : fresh) {
        explored.insert(u);
        ++out.boxes;
        Point hi{};
        for (int j = 0; j < dim; ++j) hi[j] = u[j] * kside + kside - 1;
        const Region box = Region(dim, kside * u, hi).intersect(cfg_n.region());
        const auto size = restricted_cluster(cfg_n, cfg_n.index(y), box).size();
        if (static_cast<double>(size) >= threshold) return out;  // a large finite-range cluster: no event
      }
    } else if (static_cast<std::int64_t>(count) >= k) {
      break;
    }
    if (i == k) break;
    std::vector<std::uint32_t> next;
    for (auto v : layer) {
      for (auto w : cfg_r.neighbors(v)) {
        if (dist[w] != UINT32_MAX) continue;
        dist[w] = static_cast<std::uint32_t>(i + 1);
        next.push_back(w);
        note(w);
      }
    }
    count += next.size();
    layer = std::move(next);
  }
  out.event = static_cast<std::int64_t>(count) >= k;
  return out;
}

}  // namespace

DepthPadResult depth_no_pad_probe(const ConfigSource& source, int dim, double r, std::int64_t n_cap, std::int64_t k,
                                  std::size_t replicates, std::uint64_t seed, unsigned workers) {
  require(n_cap >= 1, ErrorCode::InvalidArgument, "N must be >= 1");
  require(r > static_cast<double>(n_cap), ErrorCode::GeometryInfeasible, "edge-length cap r must exceed N");
  require(k >= 1 && replicates > 0, ErrorCode::InvalidArgument, "need k >= 1 and replicates > 0");
  DepthPadResult res;
  res.threshold = std::pow(static_cast<double>(k), 1.0 / (4.0 * dim));
  res.box_side = static_cast<std::int64_t>(std::ceil(res.threshold - 1e-12));
  const std::int64_t max_window = 2 * k + res.box_side;

  auto runs = parallel_map<DepthRun>(
      replicates,
      [&](std::size_t rep) {
        const auto s = derive_seed(seed, rep);
        // grow the window until the exploration stays in its inner half
        for (std::int64_t window = std::min<std::int64_t>(max_window, std::max<std::int64_t>(16, 4 * res.box_side));;
             window = std::min(max_window, 2 * window)) {
          auto full = source(Region::box(dim, Point{}, window), s);
          auto cfg_r = std::isinf(r) ? full : full.filter_max_length(static_cast<std::int64_t>(std::floor(r)));
          auto cfg_n = full.filter_max_length(n_cap);
          auto run = explore_depth(cfg_r, cfg_n, k, res.box_side, res.threshold, window);
          if (!run.clipped || window == max_window) return run;
        }
      },
      workers);
  std::vector<double> hits;
  double boxes = 0;
  for (const auto& run : runs) {
    hits.push_back(run.event ? 1.0 : 0.0);
    boxes += static_cast<double>(run.boxes);
  }
  res.frequency = make_estimate(hits, seed, "mc-depth-without-pad");
  res.mean_boxes = boxes / static_cast<double>(replicates);
  return res;
}

DepthPadResult depth_no_pad_probe(const Kernel& kernel, double beta, double r, std::int64_t n_cap, std::int64_t k,
                                  std::size_t replicates, std::uint64_t seed, unsigned workers) {
  return depth_no_pad_probe(kernel_source(kernel, beta), kernel.dim(), r, n_cap, k, replicates, seed, workers);
}

}  // namespace lrp
