#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace lada {

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> v);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool excludes_zero() const noexcept { return lo > 0.0 || hi < 0.0; }
};

struct PairedComparison {
  double mean_difference = 0.0;  // mean of a[i] - b[i]
  Interval ci;
};

/// Percentile bootstrap of the mean paired difference a - b. Both spans must
/// have the same length (ConfigError otherwise).
PairedComparison paired_bootstrap(std::span<const double> a, std::span<const double> b,
                                  std::size_t resamples = 10000, double level = 0.95,
                                  std::uint64_t seed = 0x5eed);

}  // namespace lada
