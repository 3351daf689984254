#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lada/matrix.hpp"
#include "lada/rng.hpp"

namespace lada {

struct KMeansOptions {
  std::size_t max_iterations = 50;
  double tolerance = 1e-6;  // largest centroid shift that counts as converged
};

struct KMeansResult {
  Matrix centroids;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Weighted k-means++ seeding. The first seed is drawn proportional to
/// `weights` (uniformly when `weights` is empty or sums to zero); later seeds
/// proportional to weight * squared distance to the nearest seed. When every
/// remaining candidate has zero mass the lowest unchosen row is taken, so the
/// k returned rows are always distinct.
std::vector<std::size_t> kmeanspp_seeds(const Matrix& x, std::span<const double> weights,
                                        std::size_t k, Rng& rng);

/// Weighted Lloyd iterations from k-means++ seeds. An empty cluster is
/// reseeded at the row farthest from its current centroid.
KMeansResult kmeans(const Matrix& x, std::span<const double> weights, std::size_t k, Rng& rng,
                    const KMeansOptions& options = {});

/// For each centroid in order, the row nearest to it (ties to the lower id)
/// that no earlier centroid has claimed. Returns row positions.
std::vector<std::size_t> nearest_distinct(const Matrix& x, std::span<const Id> ids,
                                          const Matrix& centroids);

}  // namespace lada
