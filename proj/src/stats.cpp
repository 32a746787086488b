#include "lrp/stats.hpp"

#include <cmath>

namespace lrp {

Summary summarize(std::span<const double> samples) {
  Summary s;
  s.n = samples.size();
  if (s.n == 0) return s;
  long double sum = 0;
  for (double x : samples) sum += x;
  const long double mean = sum / static_cast<long double>(s.n);
  long double ss = 0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  s.mean = static_cast<double>(mean);
  if (s.n > 1) {
    s.sd = static_cast<double>(std::sqrt(ss / static_cast<long double>(s.n - 1)));
    s.stderr = s.sd / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

Estimate make_estimate(std::span<const double> samples, std::uint64_t seed, std::string method) {
  auto s = summarize(samples);
  return {s.mean, s.stderr, s.sd, s.n, seed, std::move(method)};
}

}  // namespace lrp
