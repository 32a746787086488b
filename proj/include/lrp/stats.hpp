#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace lrp {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;      // sample standard deviation (n - 1)
  double stderr = 0.0;  // sd / sqrt(n)
  std::size_t n = 0;
};

Summary summarize(std::span<const double> samples);

/// Monte Carlo (or exact) estimate with provenance.
struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
  double sd = 0.0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::string method;
};

Estimate make_estimate(std::span<const double> samples, std::uint64_t seed, std::string method);

}  // namespace lrp
