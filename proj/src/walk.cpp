#include "lrp/walk.hpp"

#include <cmath>
#include <random>

#include "lrp/coupling.hpp"
#include "lrp/error.hpp"
#include "lrp/parallel.hpp"

namespace lrp {

WalkStats random_walk(const BoxConfig& cfg, std::uint32_t start, std::uint64_t steps, std::uint64_t seed) {
  require(start < cfg.vertex_count(), ErrorCode::InvalidArgument, "start is not a vertex");
  require(cfg.degree(start) > 0, ErrorCode::IsolatedStart, "walk start has no open edge");
  WalkStats s;
  s.steps = steps;
  s.seed = seed;
  s.visits.assign(cfg.vertex_count(), 0);
  s.visits[start] = 1;
  std::mt19937_64 rng(seed);
  std::uint32_t at = start;
  for (std::uint64_t t = 1; t <= steps; ++t) {
    auto nb = cfg.neighbors(at);
    at = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
    ++s.visits[at];
    if (at == start) {
      ++s.returns;
      if (s.first_return == 0) s.first_return = t;
    }
  }
  return s;
}

Estimate return_frequency(const BoxConfig& cfg, std::uint32_t start, std::uint64_t steps, std::size_t replicates,
                          std::uint64_t seed, unsigned workers) {
  require(start < cfg.vertex_count(), ErrorCode::InvalidArgument, "start is not a vertex");
  require(cfg.degree(start) > 0, ErrorCode::IsolatedStart, "walk start has no open edge");
  require(replicates > 0, ErrorCode::InvalidArgument, "need at least one replicate");
  auto hits = parallel_map<double>(
      replicates,
      [&](std::size_t r) {
        // no visit table here; only the first return matters
        std::mt19937_64 rng(derive_seed(seed, r));
        std::uint32_t at = start;
        for (std::uint64_t t = 1; t <= steps; ++t) {
          auto nb = cfg.neighbors(at);
          at = nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)];
          if (at == start) return 1.0;
        }
        return 0.0;
      },
      workers);
  return make_estimate(hits, seed, "mc-return-frequency");
}

SolveReport effective_resistance_report(const BoxConfig& cfg, std::uint32_t center,
                                        std::span<const std::uint32_t> boundary, double tolerance) {
  const std::size_t nv = cfg.vertex_count();
  require(center < nv, ErrorCode::InvalidArgument, "center is not a vertex");
  // 0 unknown, 1 center, 2 boundary
  std::vector<std::uint8_t> kind(nv, 0);
  for (auto b : boundary) kind[b] = 2;
  require(kind[center] != 2, ErrorCode::InvalidArgument, "center lies in the boundary set");
  kind[center] = 1;

  // unknowns: reachable from the center without crossing the boundary
  std::vector<std::int64_t> slot(nv, -1);
  std::vector<std::uint32_t> order{center};
  std::vector<char> seen(nv, 0);
  seen[center] = 1;
  bool hits_boundary = false;
  for (std::size_t h = 0; h < order.size(); ++h) {
    for (auto w : cfg.neighbors(order[h])) {
      if (kind[w] == 2) {
        hits_boundary = true;
        continue;
      }
      if (!seen[w]) {
        seen[w] = 1;
        order.push_back(w);
      }
    }
  }
  require(hits_boundary, ErrorCode::Disconnected, "center is not connected to the boundary");
  std::vector<std::uint32_t> unk;
  for (std::size_t i = 1; i < order.size(); ++i) {
    slot[order[i]] = static_cast<std::int64_t>(unk.size());
    unk.push_back(order[i]);
  }
  const std::size_t n = unk.size();

  // L phi = b, with L the Dirichlet Laplacian on the unknowns
  std::vector<double> rhs(n, 0.0), diag(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = static_cast<double>(cfg.degree(unk[i]));
    for (auto w : cfg.neighbors(unk[i])) {
      if (kind[w] == 1) rhs[i] += 1.0;
    }
  }
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diag[i] * x[i];
      for (auto w : cfg.neighbors(unk[i])) {
        if (slot[w] >= 0) acc -= x[static_cast<std::size_t>(slot[w])];
      }
      y[i] = acc;
    }
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(a[i]) * b[i];
    return static_cast<double>(s);
  };

  SolveReport rep;
  rep.unknowns = n;
  std::vector<double> phi(n, 0.0);
  if (n > 0) {
    std::vector<double> r = rhs, z(n), p(n), q(n);
    const double bnorm = std::sqrt(dot(rhs, rhs));
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    const std::size_t cap = 20 * n + 1000;
    double rel = bnorm > 0 ? std::sqrt(dot(r, r)) / bnorm : 0.0;
    while (rel > tolerance && rep.iterations < cap) {
      apply(p, q);
      const double alpha = rz / dot(p, q);
      for (std::size_t i = 0; i < n; ++i) {
        phi[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      ++rep.iterations;
      rel = std::sqrt(dot(r, r)) / bnorm;
    }
    // report the true residual, not the recursive one
    apply(phi, q);
    long double res = 0;
    for (std::size_t i = 0; i < n; ++i) res += (rhs[i] - q[i]) * static_cast<long double>(rhs[i] - q[i]);
    rep.relative_residual = bnorm > 0 ? static_cast<double>(std::sqrt(res)) / bnorm : 0.0;
  }
  long double current = 0;
  for (auto w : cfg.neighbors(center)) {
    const double v = kind[w] == 2 ? 0.0 : phi[static_cast<std::size_t>(slot[w])];
    current += 1.0 - v;
  }
  rep.resistance = static_cast<double>(1.0L / current);
  return rep;
}

double effective_resistance(const BoxConfig& cfg, std::uint32_t center, std::span<const std::uint32_t> boundary) {
  return effective_resistance_report(cfg, center, boundary).resistance;
}

std::vector<std::uint32_t> box_exterior(const BoxConfig& cfg, const Point& center, std::int64_t n) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < cfg.vertex_count(); ++v) {
    if (norm_inf(cfg.point(v) - center) >= n) out.push_back(v);
  }
  return out;
}

}  // namespace lrp
