#include "lrp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "lrp/error.hpp"

namespace lrp {

std::size_t PointHash::operator()(const Point& p) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int i = 0; i < kMaxDim; ++i) {
    h ^= static_cast<std::uint64_t>(p[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

Point make_point(std::initializer_list<std::int64_t> coords) {
  require(coords.size() <= static_cast<std::size_t>(kMaxDim), ErrorCode::DimensionMismatch,
          "too many coordinates");
  Point p{};
  int i = 0;
  for (auto c : coords) p[i++] = c;
  return p;
}

Point unit_vector(int axis) {
  Point p{};
  p[axis] = 1;
  return p;
}

bool is_zero(const Point& p) { return p == Point{}; }

std::int64_t norm_inf(const Point& p) {
  std::int64_t m = 0;
  for (int i = 0; i < kMaxDim; ++i) m = std::max(m, std::abs(p[i]));
  return m;
}

std::int64_t norm_l1(const Point& p) {
  std::int64_t m = 0;
  for (int i = 0; i < kMaxDim; ++i) m += std::abs(p[i]);
  return m;
}

std::int64_t norm2_sq(const Point& p) {
  std::int64_t m = 0;
  for (int i = 0; i < kMaxDim; ++i) m += p[i] * p[i];
  return m;
}

double norm2(const Point& p) { return std::sqrt(static_cast<double>(norm2_sq(p))); }

std::string to_string(const Point& p, int dim) {
  std::ostringstream os;
  for (int i = 0; i < dim; ++i) {
    if (i) os << ',';
    os << p[i];
  }
  return os.str();
}

Point canonical_class(const Point& p, int dim) {
  Point q{};
  for (int i = 0; i < dim; ++i) q[i] = std::abs(p[i]);
  std::sort(q.c.begin(), q.c.begin() + dim);
  return q;
}

bool lex_positive(const Point& p) {
  for (int i = 0; i < kMaxDim; ++i) {
    if (p[i] != 0) return p[i] > 0;
  }
  return false;
}

Point round_to_cell(const RealPoint& x, int dim) {
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = static_cast<std::int64_t>(std::floor(x[i] + 0.5));
  return p;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

Region::Region(int dim, Point lo, Point hi) : dim_(dim), lo_(lo), hi_(hi) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::DimensionMismatch, "dimension out of range");
  size_ = 1;
  for (int i = 0; i < dim; ++i) {
    if (hi_[i] < lo_[i]) {
      size_ = 0;
      return;
    }
    size_ *= static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
  }
  for (int i = dim; i < kMaxDim; ++i) {
    lo_[i] = 0;
    hi_[i] = 0;
  }
}

Region Region::box(int dim, const Point& center, std::int64_t radius) {
  Point lo = center, hi = center;
  for (int i = 0; i < dim; ++i) {
    lo[i] -= radius;
    hi[i] += radius;
  }
  return Region(dim, lo, hi);
}

bool Region::contains(const Point& p) const {
  if (size_ == 0) return false;
  for (int i = 0; i < dim_; ++i) {
    if (p[i] < lo_[i] || p[i] > hi_[i]) return false;
  }
  for (int i = dim_; i < kMaxDim; ++i) {
    if (p[i] != 0) return false;
  }
  return true;
}

std::size_t Region::index(const Point& p) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (int i = 0; i < dim_; ++i) {
    idx += static_cast<std::size_t>(p[i] - lo_[i]) * stride;
    stride *= static_cast<std::size_t>(extent(i));
  }
  return idx;
}

Point Region::point(std::size_t index) const {
  Point p{};
  for (int i = 0; i < dim_; ++i) {
    auto e = static_cast<std::size_t>(extent(i));
    p[i] = lo_[i] + static_cast<std::int64_t>(index % e);
    index /= e;
  }
  return p;
}

Region Region::intersect(const Region& other) const {
  require(dim_ == other.dim_, ErrorCode::DimensionMismatch, "region dimensions differ");
  Point lo{}, hi{};
  for (int i = 0; i < dim_; ++i) {
    lo[i] = std::max(lo_[i], other.lo_[i]);
    hi[i] = std::min(hi_[i], other.hi_[i]);
  }
  return Region(dim_, lo, hi);
}

Region Region::translate(const Point& offset) const { return Region(dim_, lo_ + offset, hi_ + offset); }

}  // namespace lrp
