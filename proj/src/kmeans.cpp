#include "lada/kmeans.hpp"

#include <cmath>
#include <limits>

#include "lada/error.hpp"
#include "lada/kernels/kernels.hpp"

namespace lada {

namespace {

// Index drawn proportional to mass; -1 when the total mass is zero.
long draw_proportional(std::span<const double> mass, Rng& rng) {
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) return -1;
  const double target = rng.uniform() * total;
  double acc = 0.0;
  long last_positive = -1;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (mass[i] <= 0.0) continue;
    acc += mass[i];
    last_positive = static_cast<long>(i);
    if (acc > target) return last_positive;
  }
  return last_positive;
}

}  // namespace

std::vector<std::size_t> kmeanspp_seeds(const Matrix& x, std::span<const double> weights,
                                        std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  if (k > n) throw ConfigError("kmeans++: k exceeds row count");
  if (!weights.empty() && weights.size() != n) throw ConfigError("kmeans++: weight count mismatch");
  std::vector<std::size_t> seeds;
  if (k == 0) return seeds;

  std::vector<char> chosen(n, 0);
  auto take = [&](std::size_t i) {
    seeds.push_back(i);
    chosen[i] = 1;
  };
  auto lowest_unchosen = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) return i;
    }
    return std::size_t{0};
  };

  long first = weights.empty() ? -1 : draw_proportional(weights, rng);
  take(first >= 0 ? static_cast<std::size_t>(first) : rng.index(n));

  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<double> mass(n);
  while (seeds.size() < k) {
    kernels::parallel::relax_min_distance(x, x.row(seeds.back()), min_dist);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      mass[i] = chosen[i] ? 0.0 : w * min_dist[i];
    }
    long next = draw_proportional(mass, rng);
    take(next >= 0 ? static_cast<std::size_t>(next) : lowest_unchosen());
  }
  return seeds;
}

KMeansResult kmeans(const Matrix& x, std::span<const double> weights, std::size_t k, Rng& rng,
                    const KMeansOptions& options) {
  const std::size_t n = x.rows();
  if (k == 0 || k > n) throw ConfigError("kmeans: k must be in [1, n]");
  const std::size_t d = x.cols();
  auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  KMeansResult res;
  const auto seeds = kmeanspp_seeds(x, weights, k, rng);
  res.centroids = gather_rows(x, seeds);

  std::vector<double> dist2;
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    kernels::parallel::nearest_center(x, res.centroids, res.assignment, dist2);

    Matrix sums(k, d);
    Matrix plain(k, d);
    std::vector<double> mass(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = res.assignment[i];
      const double w = weight(i);
      auto xi = x.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        sums(c, j) += w * xi[j];
        plain(c, j) += xi[j];
      }
      mass[c] += w;
      ++count[c];
    }

    Matrix next(k, d);
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) {
        // reseed at the farthest row
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (dist2[i] > dist2[far]) far = i;
        }
        auto src = x.row(far);
        std::copy(src.begin(), src.end(), next.row(c).begin());
        dist2[far] = 0.0;
        continue;
      }
      const bool weighted = mass[c] > 0.0;
      const double denom = weighted ? mass[c] : static_cast<double>(count[c]);
      for (std::size_t j = 0; j < d; ++j) next(c, j) = (weighted ? sums(c, j) : plain(c, j)) / denom;
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(squared_distance(next.row(c), res.centroids.row(c))));
    }
    res.centroids = std::move(next);
    if (shift < options.tolerance) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  kernels::parallel::nearest_center(x, res.centroids, res.assignment, dist2);
  return res;
}

std::vector<std::size_t> nearest_distinct(const Matrix& x, std::span<const Id> ids,
                                          const Matrix& centroids) {
  const std::size_t n = x.rows();
  if (centroids.rows() > n) throw ConfigError("nearest_distinct: more centroids than rows");
  std::vector<char> claimed(n, 0);
  std::vector<std::size_t> out;
  out.reserve(centroids.rows());
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (claimed[i]) continue;
      const double dd = squared_distance(x.row(i), centroids.row(c));
      if (best == n || dd < best_d || (dd == best_d && ids[i] < ids[best])) {
        best = i;
        best_d = dd;
      }
    }
    claimed[best] = 1;
    out.push_back(best);
  }
  return out;
}

}  // namespace lada
