#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lrp/cluster.hpp"
#include "lrp/kernel.hpp"
#include "lrp/lattice.hpp"
#include "lrp/sampler.hpp"
#include "lrp/stats.hpp"

namespace lrp {

/// Hop counts from a source set; unreachable vertices hold kUnreachable.
class DistanceField {
 public:
  static constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

  DistanceField(std::vector<std::uint32_t> sources, std::vector<std::uint32_t> dist)
      : sources_(std::move(sources)), dist_(std::move(dist)) {}

  std::uint32_t operator[](std::uint32_t v) const { return dist_[v]; }
  bool reachable(std::uint32_t v) const { return dist_[v] != kUnreachable; }
  const std::vector<std::uint32_t>& sources() const { return sources_; }
  const std::vector<std::uint32_t>& distances() const { return dist_; }
  /// Largest finite distance.
  std::uint32_t eccentricity() const;

 private:
  std::vector<std::uint32_t> sources_;
  std::vector<std::uint32_t> dist_;
};

/// Unit cost per open edge; stops expanding past max_depth when given.
DistanceField bfs_distances(const BoxConfig& cfg, std::span<const std::uint32_t> sources,
                            std::uint32_t max_depth = DistanceField::kUnreachable);

enum class ProxyRule { LargestCluster, BoundaryTouching };

std::string to_string(ProxyRule rule);

/// Finite-volume stand-in for the infinite cluster.
struct InfiniteClusterProxy {
  ProxyRule rule = ProxyRule::LargestCluster;
  Region working;                       // the working box
  std::vector<std::uint32_t> vertices;  // sorted configuration indices
  std::vector<char> mask;               // over configuration indices
  /// The chosen cluster crosses the sampled region (meets all 2d faces).
  bool spanning = false;

  bool empty() const { return vertices.empty(); }
  bool contains(std::uint32_t v) const { return mask[v] != 0; }
};

/// cfg is sampled on the enlarged region; the proxy is the chosen cluster of
/// cfg intersected with the working region. LargestCluster picks the largest
/// cluster of cfg; BoundaryTouching takes every cluster meeting the boundary
/// of cfg's region. Either way the proxy is empty unless some chosen cluster
/// meets all 2d faces of cfg's region.
InfiniteClusterProxy make_proxy(const BoxConfig& cfg, const Region& working,
                                ProxyRule rule = ProxyRule::LargestCluster);

/// Proxy vertices given explicitly (no spanning requirement).
InfiniteClusterProxy explicit_proxy(const BoxConfig& cfg, std::span<const Point> points);

/// B_{n + ceil(n/2)} for the working box B_n, same center.
Region enlarged_box(const Region& working);

/// x-hat: round x to its half-open cell, then take the nearest proxy vertex
/// in the infinity norm, ties to the lexicographically smallest.
std::uint32_t hat_point(const BoxConfig& cfg, const InfiniteClusterProxy& proxy, const RealPoint& x);
std::uint32_t hat_point(const BoxConfig& cfg, const InfiniteClusterProxy& proxy, const Point& x);

/// D-hat(x, y) = D(x-hat, y-hat); kUnreachable if the projections are not connected.
std::uint32_t dhat(const BoxConfig& cfg, const InfiniteClusterProxy& proxy, const Point& x, const Point& y);

/// Configuration vertices z with D-hat(z, center) <= t, sorted.
std::vector<std::uint32_t> chemical_ball(const BoxConfig& cfg, const InfiniteClusterProxy& proxy,
                                         const Point& center, std::uint32_t t);

/// x-hat for every configuration vertex.
std::vector<std::uint32_t> projection_map(const BoxConfig& cfg, const InfiniteClusterProxy& proxy);

struct ClusterDistance {
  std::uint32_t distance = 0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
};

/// Largest finite chemical distance between two vertices of A (paths may
/// leave A). Exact; eccentricity bounds prune most BFS runs.
ClusterDistance max_cluster_distance(const BoxConfig& cfg, std::span<const std::uint32_t> a);

/// Frequency of max_cluster_distance(B_n ∩ largest cluster) > factor * n. The
/// configuration lives on the enlarged box of B_n, so paths may leave B_n.
struct TailProbe {
  Estimate frequency;
  double mean_distance = 0.0;  // of the per-replicate maximum, in units of n
};
TailProbe distance_tail_probe(const ConfigSource& source, int dim, std::int64_t n, double factor,
                              std::size_t replicates, std::uint64_t seed, unsigned workers = 0);

/// Frequency of some x, y in B_inner with n < D(x, y) < inf, distances taken
/// in the configuration on B_window.
Estimate far_pair_probe(const ConfigSource& source, int dim, std::int64_t n, std::int64_t inner, std::int64_t window,
                        std::size_t replicates, std::uint64_t seed, unsigned workers = 0);

struct MuRow {
  std::int64_t n = 0;
  double mean = 0.0;    // mean of D-hat(0, n x) / n
  double stderr = 0.0;
  std::size_t replicates = 0;
  std::size_t subadditivity_violations = 0;
  std::size_t empty_proxies = 0;
  std::uint64_t seed = 0;
  std::vector<double> ratios;
};

struct MuOptions {
  std::int64_t margin = 8;
  ProxyRule rule = ProxyRule::LargestCluster;
  unsigned workers = 0;
};

/// Monte Carlo D-hat(0, n x) / n. Each replicate uses one configuration on
/// the enlarged box around the segment [0, 2 n x], coupled across n through
/// the replicate seed, and checks D-hat(0,2nx) <= D-hat(0,nx) + D-hat(nx,2nx).
std::vector<MuRow> mu_sequence(const ConfigSource& source, int dim, const Point& direction,
                               std::span<const std::int64_t> n_values, std::size_t replicates, std::uint64_t seed,
                               const MuOptions& options = {});
std::vector<MuRow> mu_sequence(const Kernel& k, double beta, const Point& direction,
                               std::span<const std::int64_t> n_values, std::size_t replicates, std::uint64_t seed,
                               const MuOptions& options = {});

/// mu on the d axis directions and the diagonal (1,...,1); the norm between
/// them is the gauge of the symmetrized convex hull of {v / mu(v)}.
class MuTable {
 public:
  MuTable(int dim, std::vector<double> axis, double diagonal);
  static MuTable uniform(int dim, double axis, double diagonal) {
    return MuTable(dim, std::vector<double>(static_cast<std::size_t>(dim), axis), diagonal);
  }

  int dim() const { return dim_; }
  double axis(int i) const { return axis_[static_cast<std::size_t>(i)]; }
  double diagonal() const { return diagonal_; }
  /// Polyhedral interpolation of mu at a real vector.
  double norm(const RealPoint& y) const;
  double norm(const Point& y) const;

 private:
  int dim_;
  std::vector<double> axis_;
  double diagonal_;
  std::vector<RealPoint> vertices_;
};

struct ShapeReport {
  bool pass = false;
  double violation = 0.0;  // max(eps_out, eps_in)
  double eps_out = 0.0;    // ball pokes out of (1 + eps_out) t B_mu
  double eps_in = 0.0;     // (1 - eps_in) t B_mu is not covered
  Point worst{};           // vertex attaining the violation
  std::string side;        // "outer", "inner" or ""
};

/// Checks (1-eps) t B_mu subset ball subset (1+eps) t B_mu for a ball given as
/// displacements from its center.
ShapeReport shape_check(std::span<const Point> ball, std::uint32_t t, const MuTable& mu, double eps);

}  // namespace lrp
