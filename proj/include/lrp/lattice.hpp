#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lrp {

inline constexpr int kMaxDim = 4;

/// Lattice point of Z^d, d <= kMaxDim. Coordinates past the dimension are zero.
struct Point {
  std::array<std::int64_t, kMaxDim> c{};

  std::int64_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::int64_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  friend auto operator<=>(const Point&, const Point&) = default;
  friend bool operator==(const Point&, const Point&) = default;

  friend Point operator+(Point a, const Point& b) {
    for (int i = 0; i < kMaxDim; ++i) a[i] += b[i];
    return a;
  }
  friend Point operator-(Point a, const Point& b) {
    for (int i = 0; i < kMaxDim; ++i) a[i] -= b[i];
    return a;
  }
  friend Point operator*(std::int64_t s, Point a) {
    for (int i = 0; i < kMaxDim; ++i) a[i] *= s;
    return a;
  }
  Point operator-() const { return Point{} - *this; }
};

struct PointHash {
  std::size_t operator()(const Point& p) const noexcept;
};

/// Point of R^d used for the projection x -> x-hat.
using RealPoint = std::array<double, kMaxDim>;

Point make_point(std::initializer_list<std::int64_t> coords);
Point unit_vector(int axis);
bool is_zero(const Point& p);
std::int64_t norm_inf(const Point& p);
std::int64_t norm_l1(const Point& p);
std::int64_t norm2_sq(const Point& p);
double norm2(const Point& p);
std::string to_string(const Point& p, int dim);

/// Sorted absolute coordinates; the key of a displacement class under the
/// full hyperoctahedral symmetry group.
Point canonical_class(const Point& p, int dim);

/// True when p is lexicographically greater than zero.
bool lex_positive(const Point& p);

/// Rounds a real point to the lattice cell x_d + [-1/2, 1/2)^d containing it.
Point round_to_cell(const RealPoint& x, int dim);

std::int64_t floor_div(std::int64_t a, std::int64_t b);

/// Axis-aligned lattice rectangle [lo, hi] (inclusive). Vertices are indexed
/// row-major with the first coordinate varying fastest.
class Region {
 public:
  Region() = default;
  Region(int dim, Point lo, Point hi);

  static Region box(int dim, const Point& center, std::int64_t radius);

  int dim() const { return dim_; }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  std::int64_t extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool contains(const Point& p) const;
  std::size_t index(const Point& p) const;
  Point point(std::size_t index) const;

  Region intersect(const Region& other) const;
  Region translate(const Point& offset) const;

  friend bool operator==(const Region&, const Region&) = default;

 private:
  int dim_ = 0;
  Point lo_{};
  Point hi_{};
  std::size_t size_ = 0;
};

/// B_m(x) in the infinity norm.
struct Box {
  int dim = 2;
  Point center{};
  std::int64_t radius = 0;

  Region region() const { return Region::box(dim, center, radius); }
  std::size_t vertex_count() const { return region().size(); }
};

/// Calls fn(v) for every v with 0 < |v|_inf <= max_len that is
/// lexicographically positive, ordered by |v|_inf shell.
template <class Fn>
void for_each_half_displacement(int dim, std::int64_t max_len, Fn&& fn);

// ---------------------------------------------------------------------------

namespace detail {

template <class Fn>
void shell_recurse(int dim, int axis, std::int64_t len, bool on_boundary, Point& v, Fn& fn) {
  if (axis == dim - 1) {
    if (on_boundary) {
      for (std::int64_t a = -len; a <= len; ++a) {
        v[axis] = a;
        if (lex_positive(v)) fn(static_cast<const Point&>(v));
      }
    } else {
      for (std::int64_t a : {-len, len}) {
        v[axis] = a;
        if (lex_positive(v)) fn(static_cast<const Point&>(v));
      }
    }
    v[axis] = 0;
    return;
  }
  for (std::int64_t a = -len; a <= len; ++a) {
    v[axis] = a;
    shell_recurse(dim, axis + 1, len, on_boundary || a == -len || a == len, v, fn);
  }
  v[axis] = 0;
}

}  // namespace detail

template <class Fn>
void for_each_half_displacement(int dim, std::int64_t max_len, Fn&& fn) {
  Point v{};
  for (std::int64_t len = 1; len <= max_len; ++len) {
    detail::shell_recurse(dim, 0, len, false, v, fn);
  }
}

}  // namespace lrp
