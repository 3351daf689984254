#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace lada {

/// Seeded random stream. Every stochastic routine takes one of these by
/// reference so a run is a pure function of its master seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream keyed by a label ("data", "select", ...).
  static Rng substream(std::uint64_t master, std::string_view label);
  static Rng substream(std::uint64_t master, std::string_view label, std::uint64_t index);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  double normal(double mean = 0.0, double stddev = 1.0);
  double gamma(double shape);
  /// Beta(a, b) as the ratio X / (X + Y) of Gamma(a, 1) and Gamma(b, 1).
  double beta(double a, double b);

  std::uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace lada
