#include "lada/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lada/error.hpp"
#include "lada/rng.hpp"

namespace lada {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

PairedComparison paired_bootstrap(std::span<const double> a, std::span<const double> b,
                                  std::size_t resamples, double level, std::uint64_t seed) {
  if (a.size() != b.size()) throw ConfigError("paired_bootstrap: sample lengths differ");
  if (a.empty()) throw ConfigError("paired_bootstrap: no samples");
  if (resamples == 0) throw ConfigError("paired_bootstrap: resamples must be positive");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];

  PairedComparison out;
  out.mean_difference = mean(diff);
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i) s += diff[rng.index(diff.size())];
    m = s / static_cast<double>(diff.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  out.ci = {quantile(means, tail), quantile(means, 1.0 - tail)};
  return out;
}

}  // namespace lada
