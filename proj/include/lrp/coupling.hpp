#pragma once

#include <cstdint>

#include "lrp/kernel.hpp"
#include "lrp/lattice.hpp"

namespace lrp {

/// Stream ids of the three independent layers used by sprinkling.
inline constexpr std::uint32_t kStreamBase = 0;
inline constexpr std::uint32_t kStreamSprinkleA = 1;
inline constexpr std::uint32_t kStreamSprinkleB = 2;

/// Deterministic family of i.i.d. uniforms U_e indexed by unordered edges.
///
/// U_e is a pure function of (seed, stream, dimension, canonical edge). The
/// family is realized so that the set {e : U_e < p} inside any region can be
/// enumerated in time proportional to its size (see sampler.hpp) while
/// agreeing bit-exactly with per-edge evaluation.
struct CouplingField {
  std::uint64_t seed = 0;
  std::uint32_t stream = kStreamBase;

  friend bool operator==(const CouplingField&, const CouplingField&) = default;
};

/// Seed for replicate `index` of an experiment seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// U_e in [0,1); symmetric in the endpoints.
double edge_uniform(const CouplingField& field, const Point& a, const Point& b, int dim);

/// U_e < 1 - exp(-beta J(a - b)).
bool edge_open(const CouplingField& field, const Point& a, const Point& b, double beta, const Kernel& k);

/// Edge open in omega_beta (field f1) or omega'_alpha (field f2).
bool union_field(const Point& a, const Point& b, const Kernel& k, const CouplingField& f1, double beta,
                 const CouplingField& f2, double alpha);

namespace coupling_detail {

/// The uniforms are stratified into bands (a_{i-1}, a_i] with
/// a_i = 4^-(kBandCount-1-i); membership of an edge in band i (given it is in
/// no lower band) is Bernoulli(q_i), realized by geometric skipping inside
/// lattice tiles keyed by (seed, stream, displacement, band, tile).
inline constexpr int kBandCount = 26;
/// Tiles are aligned to x + kTileOffset so boxes centred at the origin do not
/// straddle the coarse tiles of the low bands.
inline constexpr std::int64_t kTileOffset = 0x5A5A5A5A5AL;

double band_upper(int band);
double band_lower(int band);
double band_probability(int band);
std::int64_t tile_side(int band, int dim);

/// Walks the positions of one tile that are selected in one band.
class TileWalker {
 public:
  TileWalker(const CouplingField& field, const Point& displacement, int band, const Point& tile, int dim);

  /// Next selected linear position inside the tile, or -1 when exhausted.
  std::int64_t next();

  std::int64_t tile_volume() const { return volume_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double log_keep_;
  bool take_all_;
  std::int64_t volume_;
  std::int64_t pos_ = -1;
};

/// Band of the canonical edge (lo, lo + v).
int edge_band(const CouplingField& field, const Point& lo, const Point& v, int dim);

/// U_e given the band of the canonical edge (lo, hi).
double uniform_in_band(const CouplingField& field, const Point& lo, const Point& hi, int band, int dim);

/// Orders the endpoints lexicographically.
void canonical_edge(const Point& a, const Point& b, Point& lo, Point& hi);

}  // namespace coupling_detail

}  // namespace lrp
