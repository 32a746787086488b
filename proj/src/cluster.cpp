#include "lrp/cluster.hpp"

#include <algorithm>
#include <numeric>

#include "lrp/error.hpp"

namespace lrp {

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0), size_(n, 1), largest_(n ? 1 : 0), sets_(n) {
  std::iota(parent_.begin(), parent_.end(), 0U);
}

std::uint32_t UnionFind::find(std::uint32_t v) {
  std::uint32_t r = v;
  while (parent_[r] != r) r = parent_[r];
  while (parent_[v] != r) {
    std::uint32_t next = parent_[v];
    parent_[v] = r;
    v = next;
  }
  return r;
}

bool UnionFind::unite(std::uint32_t a, std::uint32_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  size_[a] += size_[b];
  largest_ = std::max(largest_, size_[a]);
  --sets_;
  return true;
}

ClusterForest::ClusterForest(const BoxConfig& cfg) {
  const auto n = static_cast<std::uint32_t>(cfg.vertex_count());
  UnionFind uf(n);
  for (std::uint32_t a = 0; a < n; ++a) {
    for (auto b : cfg.neighbors(a)) {
      if (a < b) uf.unite(a, b);
    }
  }
  root_.resize(n);
  size_.assign(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    root_[v] = uf.find(v);
    ++size_[root_[v]];
  }
  components_ = uf.set_count();
}

std::vector<std::uint32_t> ClusterForest::members(std::uint32_t v) const {
  std::vector<std::uint32_t> out;
  const auto r = root_[v];
  for (std::uint32_t u = 0; u < root_.size(); ++u) {
    if (root_[u] == r) out.push_back(u);
  }
  return out;
}

ClusterForest components(const BoxConfig& cfg) { return ClusterForest(cfg); }

namespace {

std::vector<char> make_mask(std::size_t n, std::span<const std::uint32_t> a) {
  std::vector<char> mask(n, 0);
  for (auto v : a) {
    require(v < n, ErrorCode::InvalidArgument, "vertex outside configuration");
    mask[v] = 1;
  }
  return mask;
}

std::vector<std::uint32_t> bfs_within(const BoxConfig& cfg, std::uint32_t x, const std::vector<char>& mask,
                                      std::vector<char>& seen) {
  std::vector<std::uint32_t> out{x};
  seen[x] = 1;
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (auto w : cfg.neighbors(out[head])) {
      if (mask[w] && !seen[w]) {
        seen[w] = 1;
        out.push_back(w);
      }
    }
  }
  return out;
}

bool lex_less(const BoxConfig& cfg, std::uint32_t a, std::uint32_t b) { return cfg.point(a) < cfg.point(b); }

}  // namespace

std::vector<std::uint32_t> region_vertices(const BoxConfig& cfg, const Region& r) {
  Region inter = cfg.region().intersect(r);
  std::vector<std::uint32_t> out;
  out.reserve(inter.size());
  for (std::size_t i = 0; i < inter.size(); ++i) out.push_back(cfg.index(inter.point(i)));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> restricted_cluster(const BoxConfig& cfg, std::uint32_t x, std::span<const std::uint32_t> a) {
  auto mask = make_mask(cfg.vertex_count(), a);
  require(x < cfg.vertex_count() && mask[x], ErrorCode::SourceOutsideSet, "source vertex not in A");
  std::vector<char> seen(cfg.vertex_count(), 0);
  auto out = bfs_within(cfg, x, mask, seen);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> restricted_cluster(const BoxConfig& cfg, std::uint32_t x, const Region& a) {
  return restricted_cluster(cfg, x, region_vertices(cfg, a));
}

LargestCluster largest_cluster(const BoxConfig& cfg, std::span<const std::uint32_t> a) {
  require(!a.empty(), ErrorCode::EmptySet, "largest_cluster of an empty set");
  auto mask = make_mask(cfg.vertex_count(), a);
  std::vector<char> seen(cfg.vertex_count(), 0);
  LargestCluster best;
  bool have = false;
  for (auto v : a) {
    if (seen[v]) continue;
    auto comp = bfs_within(cfg, v, mask, seen);
    std::uint32_t rep = *std::min_element(comp.begin(), comp.end(),
                                          [&](auto p, auto q) { return lex_less(cfg, p, q); });
    const auto size = static_cast<std::uint32_t>(comp.size());
    if (!have || size > best.size || (size == best.size && lex_less(cfg, rep, best.representative))) {
      best = {size, rep};
      have = true;
    }
  }
  return best;
}

LargestCluster largest_cluster(const BoxConfig& cfg, const Region& a) {
  return largest_cluster(cfg, std::span<const std::uint32_t>(region_vertices(cfg, a)));
}

LargestCluster largest_cluster(const BoxConfig& cfg, const ClusterForest& forest) {
  require(cfg.vertex_count() > 0, ErrorCode::EmptySet, "largest_cluster of an empty set");
  const auto n = static_cast<std::uint32_t>(cfg.vertex_count());
  // lexicographically smallest vertex per root
  std::vector<std::uint32_t> rep(n, n);
  for (std::uint32_t v = 0; v < n; ++v) {
    auto r = forest.root(v);
    if (rep[r] == n || lex_less(cfg, v, rep[r])) rep[r] = v;
  }
  LargestCluster best{0, 0};
  bool have = false;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (forest.root(v) != v) continue;
    auto size = forest.size_of(v);
    if (!have || size > best.size || (size == best.size && lex_less(cfg, rep[v], best.representative))) {
      best = {size, rep[v]};
      have = true;
    }
  }
  return best;
}

std::vector<std::uint32_t> largest_cluster_members(const BoxConfig& cfg, const Region& a) {
  auto verts = region_vertices(cfg, a);
  auto lc = largest_cluster(cfg, std::span<const std::uint32_t>(verts));
  return restricted_cluster(cfg, lc.representative, verts);
}

namespace {

bool pad_connected(const BoxConfig& cfg, const Region& pad, std::vector<std::uint32_t>& queue,
                   std::vector<std::uint32_t>& stamp, std::uint32_t mark) {
  queue.clear();
  const auto start = cfg.index(pad.point(0));
  queue.push_back(start);
  stamp[start] = mark;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (auto w : cfg.neighbors(queue[head])) {
      if (stamp[w] != mark && pad.contains(cfg.point(w))) {
        stamp[w] = mark;
        queue.push_back(w);
      }
    }
  }
  return queue.size() == pad.size();
}

}  // namespace

bool is_mpad(const BoxConfig& cfg, const Point& center, std::int64_t m) {
  require(m >= 0, ErrorCode::InvalidArgument, "pad radius must be >= 0");
  Region pad = Region::box(cfg.dim(), center, m);
  if (cfg.region().intersect(pad).size() != pad.size()) return false;
  std::vector<std::uint32_t> queue;
  std::vector<std::uint32_t> stamp(cfg.vertex_count(), 0);
  return pad_connected(cfg, pad, queue, stamp, 1);
}

std::vector<Point> find_mpads(const BoxConfig& cfg, std::span<const std::uint32_t> region, std::int64_t m) {
  require(m >= 0, ErrorCode::InvalidArgument, "pad radius must be >= 0");
  auto mask = make_mask(cfg.vertex_count(), region);
  std::vector<std::uint32_t> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Point> out;
  if (m == 0) {
    for (auto v : sorted) out.push_back(cfg.point(v));
    return out;
  }
  ClusterForest forest(cfg);
  std::vector<std::uint32_t> queue;
  std::vector<std::uint32_t> stamp(cfg.vertex_count(), 0);
  std::uint32_t mark = 0;
  for (auto v : sorted) {
    const Point c = cfg.point(v);
    Region pad = Region::box(cfg.dim(), c, m);
    if (cfg.region().intersect(pad).size() != pad.size()) continue;
    // Necessary conditions first: inside the region, one global cluster.
    bool ok = true;
    const auto r = forest.root(v);
    for (std::size_t i = 0; i < pad.size() && ok; ++i) {
      auto w = cfg.index(pad.point(i));
      ok = mask[w] && forest.root(w) == r;
    }
    if (!ok) continue;
    if (pad_connected(cfg, pad, queue, stamp, ++mark)) out.push_back(c);
  }
  return out;
}

std::vector<Point> find_mpads(const BoxConfig& cfg, const Region& region, std::int64_t m) {
  return find_mpads(cfg, std::span<const std::uint32_t>(region_vertices(cfg, region)), m);
}

}  // namespace lrp
