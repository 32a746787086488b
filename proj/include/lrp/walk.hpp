#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lrp/sampler.hpp"
#include "lrp/stats.hpp"

namespace lrp {

struct WalkStats {
  std::uint64_t steps = 0;
  std::uint64_t returns = 0;  // visits to the start after time 0
  std::uint64_t first_return = 0;  // 0 when the walk never came back
  std::vector<std::uint32_t> visits;  // per vertex of the configuration
  std::uint64_t seed = 0;
};

/// One simple random walk on the open edges (uniform over open neighbours).
WalkStats random_walk(const BoxConfig& cfg, std::uint32_t start, std::uint64_t steps, std::uint64_t seed);

/// Fraction of replicate walks that revisit `start` within `steps` steps.
Estimate return_frequency(const BoxConfig& cfg, std::uint32_t start, std::uint64_t steps, std::size_t replicates,
                          std::uint64_t seed, unsigned workers = 0);

struct SolveReport {
  double resistance = 0.0;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  std::size_t unknowns = 0;
};

/// Unit conductance per open edge; potential 1 at the center and 0 on the
/// boundary set, solved by Jacobi-preconditioned conjugate gradients to a
/// relative residual of `tolerance`. Returns 1 / (current out of the center).
SolveReport effective_resistance_report(const BoxConfig& cfg, std::uint32_t center,
                                        std::span<const std::uint32_t> boundary, double tolerance = 1e-8);
double effective_resistance(const BoxConfig& cfg, std::uint32_t center, std::span<const std::uint32_t> boundary);

/// Vertices v of the configuration with |v - center|_inf >= n.
std::vector<std::uint32_t> box_exterior(const BoxConfig& cfg, const Point& center, std::int64_t n);

}  // namespace lrp
