#include "lrp/coupling.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lrp/error.hpp"

namespace lrp {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Hasher {
 public:
  explicit Hasher(std::uint64_t seed) : h_(mix64(seed + kGolden)) {}
  Hasher& add(std::uint64_t w) {
    h_ = mix64(h_ ^ (w + kGolden + (h_ << 6) + (h_ >> 2)));
    return *this;
  }
  std::uint64_t value() const { return mix64(h_); }

 private:
  std::uint64_t h_;
};

// [0,1) with 53 random bits.
double to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

constexpr std::uint64_t kTagEdge = 0x45444745ULL;
constexpr std::uint64_t kTagTile = 0x54494c45ULL;

std::array<double, coupling_detail::kBandCount> make_band_uppers() {
  std::array<double, coupling_detail::kBandCount> a{};
  for (int i = 0; i < coupling_detail::kBandCount; ++i) {
    a[static_cast<std::size_t>(i)] = std::ldexp(1.0, -2 * (coupling_detail::kBandCount - 1 - i));
  }
  return a;
}

const std::array<double, coupling_detail::kBandCount> kBandUpper = make_band_uppers();

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return Hasher(base).add(0x5245504cULL).add(index).value();
}

namespace coupling_detail {

double band_upper(int band) { return kBandUpper[static_cast<std::size_t>(band)]; }

double band_lower(int band) { return band == 0 ? 0.0 : kBandUpper[static_cast<std::size_t>(band - 1)]; }

double band_probability(int band) {
  const double lo = band_lower(band);
  const double hi = band_upper(band);
  if (band == kBandCount - 1) return 1.0;
  return (hi - lo) / (1.0 - lo);
}

std::int64_t tile_side(int band, int dim) {
  static const auto table = [] {
    std::array<std::array<std::int64_t, kMaxDim + 1>, kBandCount> t{};
    for (int b = 0; b < kBandCount; ++b) {
      for (int d = 1; d <= kMaxDim; ++d) {
        // about 8 hits per tile, but never more than 4096 positions: rare bands
        // would otherwise walk hits far outside any realistic region
        double side = std::ceil(std::pow(std::min(8.0 / band_probability(b), 4096.0), 1.0 / d));
        t[static_cast<std::size_t>(b)][static_cast<std::size_t>(d)] =
            std::max<std::int64_t>(1, static_cast<std::int64_t>(side));
      }
    }
    return t;
  }();
  return table[static_cast<std::size_t>(band)][static_cast<std::size_t>(dim)];
}

TileWalker::TileWalker(const CouplingField& field, const Point& displacement, int band, const Point& tile, int dim) {
  Hasher h(field.seed);
  h.add(kTagTile).add(field.stream).add(static_cast<std::uint64_t>(dim)).add(static_cast<std::uint64_t>(band));
  for (int i = 0; i < dim; ++i) h.add(static_cast<std::uint64_t>(displacement[i]));
  for (int i = 0; i < dim; ++i) h.add(static_cast<std::uint64_t>(tile[i]));
  key_ = h.value();
  const double q = band_probability(band);
  take_all_ = q >= 1.0;
  log_keep_ = take_all_ ? 0.0 : std::log1p(-q);
  const std::int64_t side = tile_side(band, dim);
  volume_ = 1;
  for (int i = 0; i < dim; ++i) volume_ *= side;
}

std::int64_t TileWalker::next() {
  if (pos_ >= volume_) return -1;
  if (take_all_) {
    ++pos_;
  } else {
    // Gap ~ Geometric(q): number of rejected positions before the next hit.
    const double r = 1.0 - to_unit(mix64(key_ + kGolden * ++counter_));  // (0,1]
    const double gap = std::floor(std::log(r) / log_keep_);
    if (gap >= static_cast<double>(volume_ - pos_)) {
      pos_ = volume_;
      return -1;
    }
    pos_ += 1 + static_cast<std::int64_t>(gap);
  }
  if (pos_ >= volume_) {
    pos_ = volume_;
    return -1;
  }
  return pos_;
}

void canonical_edge(const Point& a, const Point& b, Point& lo, Point& hi) {
  if (a < b) {
    lo = a;
    hi = b;
  } else {
    lo = b;
    hi = a;
  }
}

int edge_band(const CouplingField& field, const Point& lo, const Point& v, int dim) {
  for (int band = 0; band < kBandCount - 1; ++band) {
    const std::int64_t side = tile_side(band, dim);
    Point tile{};
    std::int64_t local = 0;
    std::int64_t stride = 1;
    for (int i = 0; i < dim; ++i) {
      tile[i] = floor_div(lo[i] + kTileOffset, side);
      local += (lo[i] + kTileOffset - tile[i] * side) * stride;
      stride *= side;
    }
    TileWalker walker(field, v, band, tile, dim);
    std::int64_t pos;
    while ((pos = walker.next()) >= 0 && pos < local) {
    }
    if (pos == local) return band;
  }
  return kBandCount - 1;
}

double uniform_in_band(const CouplingField& field, const Point& lo, const Point& hi, int band, int dim) {
  Hasher h(field.seed);
  h.add(kTagEdge).add(field.stream).add(static_cast<std::uint64_t>(dim));
  for (int i = 0; i < dim; ++i) h.add(static_cast<std::uint64_t>(lo[i]));
  for (int i = 0; i < dim; ++i) h.add(static_cast<std::uint64_t>(hi[i]));
  const double w = to_unit(h.value());
  const double a = band_lower(band);
  const double b = band_upper(band);
  const double u = a + (b - a) * w;
  return u < b ? u : a;
}

}  // namespace coupling_detail

double edge_uniform(const CouplingField& field, const Point& a, const Point& b, int dim) {
  require(a != b, ErrorCode::SelfLoop, "edge endpoints coincide");
  Point lo, hi;
  coupling_detail::canonical_edge(a, b, lo, hi);
  const int band = coupling_detail::edge_band(field, lo, hi - lo, dim);
  return coupling_detail::uniform_in_band(field, lo, hi, band, dim);
}

bool edge_open(const CouplingField& field, const Point& a, const Point& b, double beta, const Kernel& k) {
  require(a != b, ErrorCode::SelfLoop, "edge endpoints coincide");
  const double p = open_probability(k, beta, a - b);
  if (p <= 0.0) return false;
  return edge_uniform(field, a, b, k.dim()) < p;
}

bool union_field(const Point& a, const Point& b, const Kernel& k, const CouplingField& f1, double beta,
                 const CouplingField& f2, double alpha) {
  require(f1.stream != f2.stream, ErrorCode::SameStream,
          "sprinkling layers must use distinct streams");
  return edge_open(f1, a, b, beta, k) || edge_open(f2, a, b, alpha, k);
}

}  // namespace lrp
