#include "lada/rng.hpp"

#include <stdexcept>

namespace lada {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Rng Rng::substream(std::uint64_t master, std::string_view label) {
  return Rng(splitmix64(splitmix64(master) ^ fnv1a(label)));
}

Rng Rng::substream(std::uint64_t master, std::string_view label, std::uint64_t index) {
  return Rng(splitmix64(splitmix64(splitmix64(master) ^ fnv1a(label)) + index));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index: empty range");
  // Rejection keeps the draw unbiased and independent of the stdlib.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return static_cast<std::size_t>(v % bound);
}

double Rng::normal(double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  return dist(engine_);
}

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double Rng::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  if (x + y == 0.0) return a / (a + b);
  return x / (x + y);
}

}  // namespace lada
