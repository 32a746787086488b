#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lrp/kernel.hpp"
#include "lrp/lattice.hpp"
#include "lrp/sampler.hpp"
#include "lrp/stats.hpp"

namespace lrp {

// --- annulus pads ---------------------------------------------------------------

/// Frequency of K_R(B_n) ~ P^delta_{m,n} with R = B_m(0): some open edge joins
/// the cluster of R inside B_n to an open m-pad of the annulus
/// B_{(1+delta)n} \ B_n. The outer radius is floor((1+delta) n).
Estimate annulus_pad_probe(const ConfigSource& source, int dim, std::int64_t n, std::int64_t m, double delta,
                           std::size_t replicates, std::uint64_t seed, unsigned workers = 0);
Estimate annulus_pad_probe(const Kernel& k, double beta, std::int64_t n, std::int64_t m, double delta,
                           std::size_t replicates, std::uint64_t seed, unsigned workers = 0);

struct PadCalibration {
  std::int64_t n = 0;
  std::int64_t m = 0;
  double delta = 0.0;
  Estimate probe;
  bool reached = false;  // probe.value >= target
};

/// First (n, m) in the candidate list whose annulus probe reaches `target`;
/// the last candidate (with reached = false) when none does.
PadCalibration calibrate_pads(const Kernel& k, double beta, std::span<const std::pair<std::int64_t, std::int64_t>> nm,
                              double delta, double target, std::size_t replicates, std::uint64_t seed,
                              unsigned workers = 0);

// --- three-stream directed exploration -------------------------------------------

/// Configuration of one stream (kStreamBase = omega_beta~, kStreamSprinkleA =
/// omega'_eta, kStreamSprinkleB = omega''_eta) on a region. Must agree
/// edgewise on overlapping regions.
using StreamSource = std::function<BoxConfig(const Region&, std::uint32_t stream)>;

struct ExplorationParams {
  std::int64_t n = 8;  // block scale: quadrant vertex u is the box B_n(8nu)
  std::int64_t m = 1;  // pad scale
  std::int64_t max_edge = 0;  // N: edges with |e|_inf > N are ignored; 0 means 14n
  int depth = 20;
  /// Split beta = beta_tilde + 2 eta; NaN selects 0.75 beta and 0.125 beta.
  double beta_tilde = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
};

struct ExplorationStep {
  int k = 0;
  std::size_t active = 0;
  std::size_t blocks_sampled = 0;  // regions sampled during this step (all streams)
  std::size_t edges_drawn = 0;
};

/// Which stream a step of the exploration consulted.
struct StreamAccess {
  int k = 0;
  int phase = 0;  // 1 or 2, the two passes of one level
  std::uint32_t stream = 0;
};

struct PathCertificate {
  bool verified = false;
  std::vector<std::pair<Point, Point>> edges;  // from B_m(0) outwards
  std::vector<std::uint32_t> streams;          // stream that opened each edge
  std::int64_t longest = 0;                    // max |e|_inf on the path
  Point target{};                              // a vertex of a deepest pad
  std::string failure;
};

struct ExplorationResult {
  int survival_depth = -1;  // largest k with A_k nonempty; -1 when A_0 is empty
  std::vector<ExplorationStep> trace;
  std::vector<std::vector<Point>> active;  // A_k as quadrant coordinates
  std::vector<StreamAccess> access;
  std::optional<PathCertificate> certificate;  // present when A_0 is nonempty
  double beta_tilde = 0.0;
  double eta = 0.0;
};

/// Runs the exploration on three coupled streams. Configurations are drawn
/// lazily on the rectangles M_i^u; the certificate replays one open path from
/// B_m(0) to a pad of a deepest active block and checks each edge.
ExplorationResult directed_exploration(const StreamSource& source, int dim, const ExplorationParams& params,
                                       const std::function<bool(const Point&, const Point&, std::uint32_t)>& verify =
                                           {});
ExplorationResult directed_exploration(const Kernel& k, double beta, const ExplorationParams& params,
                                       std::uint64_t seed);

struct ExplorationSummary {
  Estimate survival;  // fraction of replicates with A_depth nonempty
  std::size_t survived = 0;
  std::size_t certified = 0;  // surviving runs whose path replay verified
  std::int64_t longest_edge = 0;
  double mean_depth = 0.0;
  std::vector<int> depths;
};

ExplorationSummary exploration_survival(const Kernel& k, double beta, const ExplorationParams& params,
                                        std::size_t replicates, std::uint64_t seed, unsigned workers = 0);

// --- abstract directed site-bond model ----------------------------------------------

struct DirectedModel {
  double rho = 0.5;
  /// q_{x,e_i} for quadrant vertex x = (a, b) and direction i in {0, 1}; empty means q = rho.
  std::function<double(std::int64_t a, std::int64_t b, int i)> q;
  /// Only vertices with first coordinate < width are tracked; 0 means unbounded.
  std::int64_t width = 0;
};

/// Fraction of replicates with A_depth nonempty. Edge (x, x + e_i) is open when
/// its uniform, a pure function of (seed, replicate, x, i), is below q.
Estimate directed_survival(const DirectedModel& model, int depth, std::size_t replicates, std::uint64_t seed,
                           unsigned workers = 0);

/// Exact P(A_depth nonempty) for constant q = rho on the strip of the given
/// width, by propagating the law of the active set (2^width states).
double directed_survival_exact(double rho, int depth, int width);

// --- depth without pads ------------------------------------------------------------

struct DepthPadResult {
  Estimate frequency;        // of |B_k| >= k with no explored K-box holding a large omega_{<=N} cluster
  double mean_boxes = 0.0;   // explored K-boxes per replicate
  std::int64_t box_side = 0; // K = ceil(k^(1/(4d)))
  double threshold = 0.0;    // k^(1/(4d))
};

/// `r` is the edge-length cap of the explored graph (inf allowed); `n_cap` is N.
DepthPadResult depth_no_pad_probe(const ConfigSource& source, int dim, double r, std::int64_t n_cap,
                                  std::int64_t k, std::size_t replicates, std::uint64_t seed, unsigned workers = 0);
DepthPadResult depth_no_pad_probe(const Kernel& kernel, double beta, double r, std::int64_t n_cap, std::int64_t k,
                                  std::size_t replicates, std::uint64_t seed, unsigned workers = 0);

}  // namespace lrp
