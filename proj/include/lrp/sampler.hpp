#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lrp/coupling.hpp"
#include "lrp/kernel.hpp"
#include "lrp/lattice.hpp"

namespace lrp {

/// Everything needed to regenerate a configuration bit-exactly.
struct Provenance {
  std::string model = "betaJ";  // "betaJ" or "pf"
  std::string kernel_spec;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> streams;
  double miss_budget = 1e-3;
  /// Displacement classes with |v|_inf above this were not enumerated.
  std::int64_t cutoff_length = 0;
  /// Upper bound on the expected number of open edges that were skipped.
  double skipped_bound = 0.0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

using EdgeIndex = std::pair<std::uint32_t, std::uint32_t>;

/// Open-edge graph on a finite lattice region (free boundary).
class BoxConfig {
 public:
  BoxConfig() = default;
  /// Edges are region indices; duplicates and orientation are normalized.
  BoxConfig(Region region, std::vector<EdgeIndex> edges, Provenance provenance = {});

  const Region& region() const { return region_; }
  int dim() const { return region_.dim(); }
  std::size_t vertex_count() const { return region_.size(); }
  std::size_t edge_count() const { return neighbors_.size() / 2; }
  const Provenance& provenance() const { return provenance_; }

  std::span<const std::uint32_t> neighbors(std::uint32_t v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(std::uint32_t v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(std::uint32_t a, std::uint32_t b) const;

  std::uint32_t index(const Point& p) const { return static_cast<std::uint32_t>(region_.index(p)); }
  Point point(std::uint32_t v) const { return region_.point(v); }

  /// Edges (a, b) with a < b in increasing order.
  std::vector<EdgeIndex> edges() const;

  /// omega_{<=N}: keeps edges with |e|_inf <= N.
  BoxConfig filter_max_length(std::int64_t max_length) const;

  /// Same region with extra edges.
  BoxConfig with_edges(std::span<const EdgeIndex> extra) const;

  friend bool operator==(const BoxConfig& a, const BoxConfig& b) {
    return a.region_ == b.region_ && a.offsets_ == b.offsets_ && a.neighbors_ == b.neighbors_ &&
           a.provenance_ == b.provenance_;
  }

 private:
  Region region_;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> neighbors_;
  Provenance provenance_;
};

struct SampleOptions {
  double miss_budget = 1e-3;
  /// Enumerate every displacement that fits in the region, ignoring the budget.
  bool exact = false;
  /// Refuse cutoffs that need more displacement classes than this.
  std::size_t max_classes = std::size_t{1} << 26;
};

/// An open edge together with its coupling variable and weight.
struct SampledEdge {
  std::uint32_t a;
  std::uint32_t b;
  double uniform;
  double weight;  // J(e) for the beta-J model, the probability for (p,f)

  /// Smallest beta at which the edge is open: -log(1 - U) / J.
  double threshold() const;
};

struct EdgeSample {
  Region region;
  std::vector<SampledEdge> edges;
  std::int64_t cutoff_length = 0;
  double skipped_bound = 0.0;
  std::size_t classes = 0;
};

EdgeSample sample_edges(const Kernel& k, double beta, const Region& region, const CouplingField& field,
                        const SampleOptions& options = {});
EdgeSample sample_edges_pf(const ShortEdgeFunction& sf, const Region& region, const CouplingField& field,
                           const SampleOptions& options = {});

BoxConfig sample_box(const Kernel& k, double beta, const Box& box, const CouplingField& field,
                     double miss_budget = 1e-3);
BoxConfig sample_box_pf(const ShortEdgeFunction& sf, const Box& box, const CouplingField& field,
                        double miss_budget = 1e-3);
BoxConfig sample_region(const Kernel& k, double beta, const Region& region, const CouplingField& field,
                        const SampleOptions& options = {});

/// Builds a config from an edge sample, keeping edges with threshold < beta.
BoxConfig config_at_beta(const EdgeSample& sample, double beta, Provenance provenance = {});

/// Text format: one header line of key=value fields, then one line per open
/// edge with both endpoints' coordinates.
std::string serialize(const BoxConfig& cfg);
BoxConfig deserialize(std::string_view text);

/// Regenerates a configuration from its provenance alone.
BoxConfig regenerate(const Region& region, const Provenance& provenance);

/// Configuration of one replicate (identified by its seed) on a region.
/// Sources built on a coupling field agree edgewise on overlapping regions.
using ConfigSource = std::function<BoxConfig(const Region&, std::uint64_t seed)>;

ConfigSource kernel_source(const Kernel& k, double beta, double miss_budget = 1e-3,
                           std::uint32_t stream = kStreamBase);
ConfigSource pf_source(const ShortEdgeFunction& sf, double miss_budget = 1e-3, std::uint32_t stream = kStreamBase);

}  // namespace lrp
