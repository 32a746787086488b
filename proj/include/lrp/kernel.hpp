#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "lrp/lattice.hpp"

namespace lrp {

/// Symmetric, translation-invariant edge weight J : Z^d \ {0} -> [0, inf).
///
/// Kernels are immutable values. Every family is invariant under coordinate
/// permutations and sign flips; evaluation canonicalizes the displacement by
/// sorting absolute coordinates. Truncation radii use the Euclidean norm.
class Kernel {
 public:
  /// J(x) = prefactor * |x|_2^(-exponent).
  static Kernel power_law(int dim, double prefactor, double exponent);
  /// J(x) = weight when |x|_1 = 1, else 0.
  static Kernel nearest_neighbor(int dim, double weight);
  /// Weights keyed by displacement; keys are canonicalized on insertion.
  static Kernel tabulated(int dim, const std::map<Point, double>& weights);
  /// J(x) = base(x) for |x|_2 <= radius, else 0.
  static Kernel truncated(const Kernel& base, double radius);
  /// J(x) = base(x) + nn_bonus when |x|_2 = 1.
  static Kernel perturbed_nn(const Kernel& base, double nn_bonus);
  /// J(x) = inner(x) for |x|_2 <= radius, outer(x) beyond.
  static Kernel spliced(const Kernel& inner, const Kernel& outer, double radius);
  static Kernel zero(int dim);

  int dim() const;

  /// J(x); throws ZeroDisplacement for x = 0.
  double operator()(const Point& x) const;
  /// J on a canonical class key (sorted absolute coordinates, nonzero).
  double eval_canonical(const Point& key) const;

  /// Beyond `radius`, J(x) = prefactor * |x|^(-exponent) exactly
  /// (prefactor 0 means finite support).
  struct Asymptotic {
    double prefactor = 0.0;
    double exponent = 0.0;
    double radius = 0.0;
  };
  Asymptotic asymptotic() const;

  /// Text form accepted by parse_kernel; round-trips exactly.
  std::string spec() const;

  struct Node;

 private:
  explicit Kernel(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Kernel parse_kernel(std::string_view spec, int dim);

double kernel_eval(const Kernel& k, const Point& x);

/// 1 - exp(-beta J(x)).
double open_probability(const Kernel& k, double beta, const Point& x);
double open_probability_from_weight(double beta, double weight);

/// J(A, B) = sum_{x in A} sum_{y in B} J(x - y) for disjoint A, B.
double kernel_mass(const Kernel& k, std::span<const Point> a, std::span<const Point> b);

Kernel truncate(const Kernel& k, double radius);

/// sum over |x|_2 > radius of J(x); absolute tolerance 1e-12.
double tail_mass(const Kernel& k, double radius);

/// sum over x != 0 of J(x).
double total_mass(const Kernel& k);

/// sum over |x|_2 > radius of 1 - exp(-beta J(x)); absolute tolerance 1e-12.
double open_mass(const Kernel& k, double beta, double radius);

/// sum over x != 0 of |k1(x) - k2(x)|.
double l1_distance(const Kernel& k1, const Kernel& k2);

/// Epstein zeta of the cubic lattice: sum over x in Z^d \ {0} of |x|_2^(-s),
/// s > d, by the theta-function split of the Mellin integral.
double lattice_zeta(int dim, double s);

/// sum over 0 < |x|_2 <= radius of fn(key) * (size of the symmetry class of
/// key), enumerating canonical keys only.
double sum_over_ball(int dim, double radius, double (*fn)(const Point&, const void*), const void* ctx);

template <class Fn>
double sum_over_ball(int dim, double radius, Fn&& fn) {
  return sum_over_ball(
      dim, radius,
      [](const Point& key, const void* c) { return (*static_cast<const std::remove_reference_t<Fn>*>(c))(key); },
      static_cast<const void*>(&fn));
}

/// Number of lattice points sharing the canonical key.
std::int64_t class_multiplicity(const Point& key, int dim);

/// Short-edge model: nearest-neighbor edges open with probability p,
/// longer edges with probability f(x - y) < 1. The long part reuses the
/// kernel families as a carrier for f.
class ShortEdgeFunction {
 public:
  ShortEdgeFunction(double nn_probability, Kernel long_part);

  /// f(x) = gamma |x|^(-s) for |x| > 1.
  static ShortEdgeFunction power(int dim, double nn_probability, double gamma, double s);

  int dim() const { return long_part_.dim(); }
  double nn_probability() const { return p_; }
  const Kernel& long_part() const { return long_part_; }

  /// Open probability for displacement x (p on unit vectors, f elsewhere).
  double operator()(const Point& x) const;
  double f(const Point& x) const;

  std::string spec() const;

 private:
  double p_;
  Kernel long_part_;
};

ShortEdgeFunction parse_short_edge_function(std::string_view spec, int dim);

/// f_n(x) = f(x) for |x| <= n and gamma / x^2 for |x| > n (d = 1).
ShortEdgeFunction make_counterexample_1d(const ShortEdgeFunction& f, double gamma, std::int64_t n);

}  // namespace lrp
