#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrp/lattice.hpp"
#include "lrp/sampler.hpp"

namespace lrp {

/// Disjoint sets with path compression and union by rank.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0);

  std::uint32_t find(std::uint32_t v);
  /// Returns true when a and b were in different sets.
  bool unite(std::uint32_t a, std::uint32_t b);
  std::uint32_t size_of(std::uint32_t v) { return size_[find(v)]; }
  std::uint32_t largest() const { return largest_; }
  std::size_t set_count() const { return sets_; }
  std::size_t element_count() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::uint32_t> size_;
  std::uint32_t largest_ = 0;
  std::size_t sets_ = 0;
};

/// Finished partition of a configuration into open clusters; read-only.
class ClusterForest {
 public:
  ClusterForest() = default;
  explicit ClusterForest(const BoxConfig& cfg);

  std::size_t vertex_count() const { return root_.size(); }
  std::uint32_t root(std::uint32_t v) const { return root_[v]; }
  bool connected(std::uint32_t a, std::uint32_t b) const { return root_[a] == root_[b]; }
  std::uint32_t size_of(std::uint32_t v) const { return size_[root_[v]]; }
  std::size_t component_count() const { return components_; }
  /// Members of the cluster of v, increasing.
  std::vector<std::uint32_t> members(std::uint32_t v) const;

 private:
  std::vector<std::uint32_t> root_;
  std::vector<std::uint32_t> size_;
  std::size_t components_ = 0;
};

ClusterForest components(const BoxConfig& cfg);

/// K_x(A): vertices reachable from x by open edges with both ends in A.
/// Result sorted by index.
std::vector<std::uint32_t> restricted_cluster(const BoxConfig& cfg, std::uint32_t x, std::span<const std::uint32_t> a);
std::vector<std::uint32_t> restricted_cluster(const BoxConfig& cfg, std::uint32_t x, const Region& a);

struct LargestCluster {
  std::uint32_t size = 0;
  std::uint32_t representative = 0;  // lexicographically smallest vertex of the cluster
};

/// Largest component of the subgraph induced on A; ties go to the cluster
/// with the lexicographically smallest representative.
LargestCluster largest_cluster(const BoxConfig& cfg, std::span<const std::uint32_t> a);
LargestCluster largest_cluster(const BoxConfig& cfg, const Region& a);
/// A = the whole configuration; uses the forest directly.
LargestCluster largest_cluster(const BoxConfig& cfg, const ClusterForest& forest);

/// Vertices of the largest cluster of the induced subgraph on A, sorted.
std::vector<std::uint32_t> largest_cluster_members(const BoxConfig& cfg, const Region& a);

/// True when B_m(center) lies in the configuration and is internally connected.
bool is_mpad(const BoxConfig& cfg, const Point& center, std::int64_t m);

/// Centers x with B_m(x) inside the region and internally connected, in
/// increasing index order.
std::vector<Point> find_mpads(const BoxConfig& cfg, std::span<const std::uint32_t> region, std::int64_t m);
std::vector<Point> find_mpads(const BoxConfig& cfg, const Region& region, std::int64_t m);

/// Vertex indices of a region inside the configuration's region.
std::vector<std::uint32_t> region_vertices(const BoxConfig& cfg, const Region& r);

}  // namespace lrp
