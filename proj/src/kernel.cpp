#include "lrp/kernel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <variant>

#include "lrp/error.hpp"

namespace lrp {

namespace {

struct PowerLaw {
  double prefactor;
  double exponent;
};
struct NearestNeighbor {
  double weight;
};
struct Tabulated {
  std::map<Point, double> weights;  // canonical keys
};
struct Truncated {
  Kernel base;
  double radius;
};
struct PerturbedNN {
  Kernel base;
  double bonus;
};
struct Spliced {
  Kernel inner;
  Kernel outer;
  double radius;
};
struct Zero {};

bool within(std::int64_t n2, double radius) { return static_cast<double>(n2) <= radius * radius; }

std::int64_t key_norm2(const Point& key) { return norm2_sq(key); }

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

struct Kernel::Node {
  int dim;
  std::variant<PowerLaw, NearestNeighbor, Tabulated, Truncated, PerturbedNN, Spliced, Zero> family;
};

namespace {

double eval_node(const Kernel::Node& node, const Point& key);

}  // namespace

Kernel Kernel::power_law(int dim, double prefactor, double exponent) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::DimensionMismatch, "dimension out of range");
  require(prefactor > 0.0, ErrorCode::InvalidArgument, "power_law prefactor must be positive");
  require(exponent > 0.0, ErrorCode::InvalidArgument, "power_law exponent must be positive");
  return Kernel(std::make_shared<const Node>(Node{dim, PowerLaw{prefactor, exponent}}));
}

Kernel Kernel::nearest_neighbor(int dim, double weight) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::DimensionMismatch, "dimension out of range");
  require(weight > 0.0, ErrorCode::InvalidArgument, "nearest_neighbor weight must be positive");
  return Kernel(std::make_shared<const Node>(Node{dim, NearestNeighbor{weight}}));
}

Kernel Kernel::tabulated(int dim, const std::map<Point, double>& weights) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::DimensionMismatch, "dimension out of range");
  Tabulated t;
  for (const auto& [x, w] : weights) {
    require(!is_zero(x), ErrorCode::ZeroDisplacement, "tabulated kernel keyed at the origin");
    require(w >= 0.0 && std::isfinite(w), ErrorCode::InvalidArgument, "tabulated weight must be finite and >= 0");
    for (int i = dim; i < kMaxDim; ++i) {
      require(x[i] == 0, ErrorCode::DimensionMismatch, "tabulated key exceeds dimension");
    }
    Point key = canonical_class(x, dim);
    auto [it, inserted] = t.weights.emplace(key, w);
    require(inserted || it->second == w, ErrorCode::InvalidArgument,
            "tabulated kernel assigns different weights to one symmetry class");
  }
  return Kernel(std::make_shared<const Node>(Node{dim, std::move(t)}));
}

Kernel Kernel::truncated(const Kernel& base, double radius) {
  require(radius > 0.0, ErrorCode::InvalidArgument, "truncation radius must be positive");
  return Kernel(std::make_shared<const Node>(Node{base.dim(), Truncated{base, radius}}));
}

Kernel Kernel::perturbed_nn(const Kernel& base, double nn_bonus) {
  require(nn_bonus >= 0.0, ErrorCode::InvalidArgument, "nn_bonus must be >= 0");
  return Kernel(std::make_shared<const Node>(Node{base.dim(), PerturbedNN{base, nn_bonus}}));
}

Kernel Kernel::spliced(const Kernel& inner, const Kernel& outer, double radius) {
  require(inner.dim() == outer.dim(), ErrorCode::DimensionMismatch, "spliced kernels differ in dimension");
  require(radius > 0.0, ErrorCode::InvalidArgument, "splice radius must be positive");
  return Kernel(std::make_shared<const Node>(Node{inner.dim(), Spliced{inner, outer, radius}}));
}

Kernel Kernel::zero(int dim) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::DimensionMismatch, "dimension out of range");
  return Kernel(std::make_shared<const Node>(Node{dim, Zero{}}));
}

int Kernel::dim() const { return node_->dim; }

double Kernel::operator()(const Point& x) const {
  require(!is_zero(x), ErrorCode::ZeroDisplacement, "kernel evaluated at the zero displacement");
  for (int i = dim(); i < kMaxDim; ++i) {
    require(x[i] == 0, ErrorCode::DimensionMismatch, "displacement has more coordinates than the kernel");
  }
  return eval_canonical(canonical_class(x, dim()));
}

double Kernel::eval_canonical(const Point& key) const { return eval_node(*node_, key); }

namespace {

double eval_node(const Kernel::Node& node, const Point& key) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return f.prefactor * std::pow(static_cast<double>(key_norm2(key)), -0.5 * f.exponent);
        } else if constexpr (std::is_same_v<T, NearestNeighbor>) {
          return key_norm2(key) == 1 ? f.weight : 0.0;
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          auto it = f.weights.find(key);
          return it == f.weights.end() ? 0.0 : it->second;
        } else if constexpr (std::is_same_v<T, Truncated>) {
          return within(key_norm2(key), f.radius) ? f.base.eval_canonical(key) : 0.0;
        } else if constexpr (std::is_same_v<T, PerturbedNN>) {
          return f.base.eval_canonical(key) + (key_norm2(key) == 1 ? f.bonus : 0.0);
        } else if constexpr (std::is_same_v<T, Spliced>) {
          return within(key_norm2(key), f.radius) ? f.inner.eval_canonical(key) : f.outer.eval_canonical(key);
        } else {
          return 0.0;
        }
      },
      node.family);
}

}  // namespace

Kernel::Asymptotic Kernel::asymptotic() const {
  return std::visit(
      [&](const auto& f) -> Asymptotic {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return {f.prefactor, f.exponent, 0.0};
        } else if constexpr (std::is_same_v<T, NearestNeighbor>) {
          return {0.0, 0.0, 1.0};
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          double r = 0.0;
          for (const auto& [key, w] : f.weights) r = std::max(r, norm2(key));
          return {0.0, 0.0, r};
        } else if constexpr (std::is_same_v<T, Truncated>) {
          return {0.0, 0.0, f.radius};
        } else if constexpr (std::is_same_v<T, PerturbedNN>) {
          auto a = f.base.asymptotic();
          a.radius = std::max(a.radius, 1.0);
          return a;
        } else if constexpr (std::is_same_v<T, Spliced>) {
          auto a = f.outer.asymptotic();
          a.radius = std::max(a.radius, f.radius);
          return a;
        } else {
          return {0.0, 0.0, 0.0};
        }
      },
      node_->family);
}

std::string Kernel::spec() const {
  return std::visit(
      [&](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          return "power_law(" + fmt_double(f.prefactor) + "," + fmt_double(f.exponent) + ")";
        } else if constexpr (std::is_same_v<T, NearestNeighbor>) {
          return "nearest_neighbor(" + fmt_double(f.weight) + ")";
        } else if constexpr (std::is_same_v<T, Tabulated>) {
          std::string s = "tabulated(";
          bool first = true;
          for (const auto& [key, w] : f.weights) {
            if (!first) s += ";";
            first = false;
            s += to_string(key, dim()) + "=" + fmt_double(w);
          }
          return s + ")";
        } else if constexpr (std::is_same_v<T, Truncated>) {
          return "truncated(" + f.base.spec() + "," + fmt_double(f.radius) + ")";
        } else if constexpr (std::is_same_v<T, PerturbedNN>) {
          return "perturbed_nn(" + f.base.spec() + "," + fmt_double(f.bonus) + ")";
        } else if constexpr (std::is_same_v<T, Spliced>) {
          return "spliced(" + f.inner.spec() + "," + f.outer.spec() + "," + fmt_double(f.radius) + ")";
        } else {
          return "zero";
        }
      },
      node_->family);
}

// --- parsing ---------------------------------------------------------------

namespace {

class SpecParser {
 public:
  SpecParser(std::string_view text, int dim) : s_(text), dim_(dim) {}

  Kernel parse_all() {
    Kernel k = parse_kernel_expr();
    skip_ws();
    if (pos_ != s_.size()) error("trailing characters");
    return k;
  }

  Kernel parse_kernel_expr() {
    std::string name = identifier();
    if (name == "zero") return Kernel::zero(dim_);
    expect('(');
    Kernel result = Kernel::zero(dim_);
    if (name == "power_law") {
      double c = number();
      expect(',');
      double s = number();
      result = Kernel::power_law(dim_, c, s);
    } else if (name == "nearest_neighbor") {
      result = Kernel::nearest_neighbor(dim_, number());
    } else if (name == "truncated") {
      Kernel base = parse_kernel_expr();
      expect(',');
      result = Kernel::truncated(base, number());
    } else if (name == "perturbed_nn") {
      Kernel base = parse_kernel_expr();
      expect(',');
      result = Kernel::perturbed_nn(base, number());
    } else if (name == "spliced") {
      Kernel inner = parse_kernel_expr();
      expect(',');
      Kernel outer = parse_kernel_expr();
      expect(',');
      result = Kernel::spliced(inner, outer, number());
    } else if (name == "tabulated") {
      std::map<Point, double> weights;
      skip_ws();
      while (peek() != ')') {
        Point key{};
        for (int i = 0; i < dim_; ++i) {
          if (i) expect(',');
          key[i] = static_cast<std::int64_t>(number());
        }
        expect('=');
        weights[key] = number();
        skip_ws();
        if (peek() == ';') ++pos_;
      }
      result = Kernel::tabulated(dim_, weights);
    } else {
      error("unknown kernel family '" + name + "'");
    }
    expect(')');
    return result;
  }

  double number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == 'e' || s_[pos_] == 'E' || s_[pos_] == '-' || s_[pos_] == '+' ||
                                s_[pos_] == 'i' || s_[pos_] == 'n' || s_[pos_] == 'f')) {
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty()) error("expected a number");
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) error("malformed number '" + tok + "'");
    return v;
  }

  std::string identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (start == pos_) error("expected an identifier");
    return std::string(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorCode::ConfigParse, "kernel spec '" + std::string(s_) + "' at " + std::to_string(pos_) + ": " + what);
  }

 private:
  std::string_view s_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Kernel parse_kernel(std::string_view spec, int dim) { return SpecParser(spec, dim).parse_all(); }

// --- evaluation helpers ----------------------------------------------------

double kernel_eval(const Kernel& k, const Point& x) { return k(x); }

double open_probability_from_weight(double beta, double weight) {
  require(beta >= 0.0, ErrorCode::InvalidArgument, "beta must be >= 0");
  return -std::expm1(-beta * weight);
}

double open_probability(const Kernel& k, double beta, const Point& x) {
  return open_probability_from_weight(beta, k(x));
}

double kernel_mass(const Kernel& k, std::span<const Point> a, std::span<const Point> b) {
  std::vector<Point> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<Point> common;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  require(common.empty(), ErrorCode::OverlappingSets, "kernel_mass requires disjoint sets");
  long double sum = 0.0L;
  for (const auto& x : a) {
    for (const auto& y : b) sum += k(x - y);
  }
  return static_cast<double>(sum);
}

Kernel truncate(const Kernel& k, double radius) { return Kernel::truncated(k, radius); }

std::int64_t class_multiplicity(const Point& key, int dim) {
  std::int64_t mult = 1;
  for (int i = 0; i < dim; ++i) {
    if (key[i] != 0) mult *= 2;
  }
  // d! / prod(run lengths)!
  std::int64_t fact = 1;
  for (int i = 2; i <= dim; ++i) fact *= i;
  int i = 0;
  while (i < dim) {
    int j = i;
    while (j < dim && key[j] == key[i]) ++j;
    for (int r = 2; r <= j - i; ++r) fact /= r;
    i = j;
  }
  return mult * fact;
}

namespace {

void ball_recurse(int dim, int pos, std::int64_t min_val, std::int64_t sum2, double r2, Point& key,
                  double (*fn)(const Point&, const void*), const void* ctx, long double& acc) {
  if (pos == dim) {
    if (sum2 == 0) return;
    acc += static_cast<long double>(fn(key, ctx)) * static_cast<long double>(class_multiplicity(key, dim));
    return;
  }
  const int rest = dim - pos;
  for (std::int64_t v = min_val;; ++v) {
    const std::int64_t add = v * v;
    if (static_cast<double>(sum2 + add * rest) > r2) break;
    key[pos] = v;
    ball_recurse(dim, pos + 1, v, sum2 + add, r2, key, fn, ctx, acc);
  }
  key[pos] = 0;
}

}  // namespace

double sum_over_ball(int dim, double radius, double (*fn)(const Point&, const void*), const void* ctx) {
  if (radius < 1.0) return 0.0;
  Point key{};
  long double acc = 0.0L;
  ball_recurse(dim, 0, 0, 0, radius * radius, key, fn, ctx, acc);
  return static_cast<double>(acc);
}

// --- lattice zeta ----------------------------------------------------------

namespace {

double theta3(double u) {
  double sum = 1.0;
  for (int n = 1;; ++n) {
    double term = 2.0 * std::exp(-std::numbers::pi * u * n * n);
    sum += term;
    if (term < 1e-22 * sum) break;
  }
  return sum;
}

double theta_integral(int dim, double a) {
  // int_1^inf u^(a-1) (theta(u)^d - 1) du
  auto integrand = [&](double u) {
    double excess = std::pow(theta3(u), dim) - 1.0;
    return std::pow(u, a - 1.0) * excess;
  };
  double total = 0.0;
  double lo = 1.0;
  for (double hi = 2.0; lo < 80.0; hi *= 2.0) {
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 10, 1e-16);
    lo = hi;
  }
  return total;
}

}  // namespace

double lattice_zeta(int dim, double s) {
  require(s > dim, ErrorCode::DivergentTail, "lattice sum of |x|^-s diverges for s <= d");
  static std::mutex mu;
  static std::map<std::pair<int, double>, double> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find({dim, s});
    if (it != cache.end()) return it->second;
  }
  const double pi = std::numbers::pi;
  double bracket = theta_integral(dim, 0.5 * s) + theta_integral(dim, 0.5 * (dim - s)) + 2.0 / (s - dim) - 2.0 / s;
  double value = std::pow(pi, 0.5 * s) / boost::math::tgamma(0.5 * s) * bracket;
  std::lock_guard lock(mu);
  cache[{dim, s}] = value;
  return value;
}

namespace {

/// sum over |x| > radius of prefactor |x|^-s.
double power_tail(int dim, double prefactor, double s, double radius) {
  if (prefactor == 0.0) return 0.0;
  require(s > dim, ErrorCode::DivergentTail, "power-law tail diverges for s <= d");
  double inner = sum_over_ball(dim, radius, [s](const Point& key) {
    return std::pow(static_cast<double>(norm2_sq(key)), -0.5 * s);
  });
  double rest = lattice_zeta(dim, s) - inner;
  return prefactor * std::max(rest, 0.0);
}

/// sum over radius_lo < |x| <= radius_hi of fn(key) with multiplicity.
template <class Fn>
double annulus_sum(int dim, double radius_lo, double radius_hi, Fn&& fn) {
  if (radius_hi <= radius_lo) return 0.0;
  const double lo2 = radius_lo * radius_lo;
  return sum_over_ball(dim, radius_hi, [&](const Point& key) {
    return static_cast<double>(norm2_sq(key)) <= lo2 ? 0.0 : fn(key);
  });
}

}  // namespace

double tail_mass(const Kernel& k, double radius) {
  require(radius >= 0.0, ErrorCode::InvalidArgument, "tail radius must be >= 0");
  const auto a = k.asymptotic();
  if (a.prefactor > 0.0) {
    require(a.exponent > k.dim(), ErrorCode::DivergentTail, "kernel tail diverges (s <= d)");
  }
  double direct = annulus_sum(k.dim(), radius, a.radius, [&](const Point& key) { return k.eval_canonical(key); });
  return direct + power_tail(k.dim(), a.prefactor, a.exponent, std::max(radius, a.radius));
}

double total_mass(const Kernel& k) { return tail_mass(k, 0.0); }

double open_mass(const Kernel& k, double beta, double radius) {
  require(radius >= 0.0 && beta >= 0.0, ErrorCode::InvalidArgument, "open_mass needs beta, radius >= 0");
  if (beta == 0.0) return 0.0;
  const auto a = k.asymptotic();
  double r1 = std::max(radius, a.radius);
  if (a.prefactor > 0.0) {
    require(a.exponent > k.dim(), ErrorCode::DivergentTail, "kernel tail diverges (s <= d)");
    // beyond r1 the series in beta J converges geometrically with ratio <= 1e-3
    r1 = std::max(r1, std::pow(beta * a.prefactor / 1e-3, 1.0 / a.exponent));
  }
  double direct = annulus_sum(k.dim(), radius, r1, [&](const Point& key) {
    return -std::expm1(-beta * k.eval_canonical(key));
  });
  if (a.prefactor == 0.0) return direct;
  // 1 - e^-u = u - u^2/2 + u^3/6 - ..., each power a zeta tail
  double series = 0.0;
  double coef = 1.0;
  for (int j = 1; j <= 5; ++j) {
    coef *= beta * a.prefactor / j;
    const double term = coef * power_tail(k.dim(), 1.0, j * a.exponent, r1);
    series += (j % 2 ? term : -term);
  }
  return direct + series;
}

double l1_distance(const Kernel& k1, const Kernel& k2) {
  require(k1.dim() == k2.dim(), ErrorCode::DimensionMismatch, "l1_distance between kernels of different dimension");
  const int dim = k1.dim();
  const auto a1 = k1.asymptotic();
  const auto a2 = k2.asymptotic();
  double r0 = std::max(a1.radius, a2.radius);
  if (a1.prefactor > 0.0) require(a1.exponent > dim, ErrorCode::DivergentTail, "kernel tail diverges");
  if (a2.prefactor > 0.0) require(a2.exponent > dim, ErrorCode::DivergentTail, "kernel tail diverges");

  // Beyond r_star the two power tails have a fixed ordering.
  double r_star = r0;
  if (a1.prefactor > 0.0 && a2.prefactor > 0.0 && a1.exponent != a2.exponent) {
    double cross = std::pow(a1.prefactor / a2.prefactor, 1.0 / (a1.exponent - a2.exponent));
    r_star = std::max(r0, std::ceil(cross));
  }
  double direct = sum_over_ball(dim, r_star, [&](const Point& key) {
    return std::abs(k1.eval_canonical(key) - k2.eval_canonical(key));
  });
  if (a1.prefactor > 0.0 && a2.prefactor > 0.0 && a1.exponent == a2.exponent) {
    return direct + power_tail(dim, std::abs(a1.prefactor - a2.prefactor), a1.exponent, r_star);
  }
  double t1 = power_tail(dim, a1.prefactor, a1.exponent, r_star);
  double t2 = power_tail(dim, a2.prefactor, a2.exponent, r_star);
  return direct + std::abs(t1 - t2);
}

// --- short-edge model ------------------------------------------------------

ShortEdgeFunction::ShortEdgeFunction(double nn_probability, Kernel long_part)
    : p_(nn_probability), long_part_(std::move(long_part)) {
  require(p_ >= 0.0 && p_ <= 1.0, ErrorCode::InvalidArgument, "nn probability must lie in [0,1]");
  // f < 1 everywhere: check every class out to one shell past the
  // asymptotic radius; beyond it the tail decreases.
  const auto a = long_part_.asymptotic();
  const double r = std::max(a.radius, 1.0) + 2.0;
  sum_over_ball(dim(), r, [&](const Point& key) {
    if (norm2_sq(key) > 1) {
      double v = long_part_.eval_canonical(key);
      require(v >= 0.0 && v < 1.0, ErrorCode::InvalidArgument,
              "short-edge function must take values in [0,1) off the nearest neighbors");
    }
    return 0.0;
  });
}

ShortEdgeFunction ShortEdgeFunction::power(int dim, double nn_probability, double gamma, double s) {
  return ShortEdgeFunction(nn_probability, Kernel::power_law(dim, gamma, s));
}

double ShortEdgeFunction::f(const Point& x) const { return long_part_(x); }

double ShortEdgeFunction::operator()(const Point& x) const {
  require(!is_zero(x), ErrorCode::ZeroDisplacement, "short-edge function evaluated at zero");
  return norm2_sq(x) == 1 ? p_ : long_part_(x);
}

std::string ShortEdgeFunction::spec() const { return "pf(" + fmt_double(p_) + ";" + long_part_.spec() + ")"; }

ShortEdgeFunction parse_short_edge_function(std::string_view spec, int dim) {
  auto bad = [&](const char* why) { fail(ErrorCode::ConfigParse, "short-edge spec '" + std::string(spec) + "': " + why); };
  if (spec.substr(0, 3) != "pf(" || spec.back() != ')') bad("expected pf(p;kernel)");
  auto inner = spec.substr(3, spec.size() - 4);
  auto semi = inner.find(';');
  if (semi == std::string_view::npos) bad("missing ';'");
  std::string ptxt(inner.substr(0, semi));
  char* end = nullptr;
  double p = std::strtod(ptxt.c_str(), &end);
  if (end != ptxt.c_str() + ptxt.size()) bad("malformed probability");
  return ShortEdgeFunction(p, parse_kernel(inner.substr(semi + 1), dim));
}

ShortEdgeFunction make_counterexample_1d(const ShortEdgeFunction& f, double gamma, std::int64_t n) {
  require(f.dim() == 1, ErrorCode::DimensionMismatch, "counterexample construction is one-dimensional");
  require(gamma > 1.0, ErrorCode::InvalidArgument, "gamma must exceed 1");
  require(n >= 1, ErrorCode::InvalidArgument, "n must be positive");
  std::map<Point, double> inner;
  for (std::int64_t x = 2; x <= n; ++x) inner[make_point({x})] = f.f(make_point({x}));
  Kernel outer = Kernel::power_law(1, gamma, 2.0);
  Kernel table = Kernel::tabulated(1, inner);
  return ShortEdgeFunction(f.nn_probability(), Kernel::spliced(table, outer, static_cast<double>(n)));
}

}  // namespace lrp
