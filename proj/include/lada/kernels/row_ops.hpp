#pragma once

// Per-row bodies shared by the serial and parallel kernel loops.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "lada/matrix.hpp"

namespace lada::kernels::rows {

inline void affine_row(std::span<const double> x, const Matrix& w, std::span<const double> bias,
                       bool relu, std::span<double> out) {
  for (std::size_t j = 0; j < w.rows(); ++j) {
    double acc = bias[j] + dot(x, w.row(j));
    out[j] = relu && acc < 0.0 ? 0.0 : acc;
  }
}

inline void softmax_row(std::span<double> z) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : z) peak = std::max(peak, v);
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : z) v /= total;
}

inline void cosine_topk_row(const Matrix& unit, std::span<const Id> ids, std::size_t i,
                            std::size_t k, std::span<std::size_t> pos_out,
                            std::span<double> sim_out) {
  const std::size_t n = unit.rows();
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(n - 1);
  const auto xi = unit.row(i);
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    cand.emplace_back(dot(xi, unit.row(j)), j);
  }
  auto better = [&ids](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return ids[a.second] < ids[b.second];
  };
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                    better);
  for (std::size_t r = 0; r < k; ++r) {
    pos_out[r] = cand[r].second;
    sim_out[r] = cand[r].first;
  }
}

inline std::pair<std::size_t, double> nearest_center_row(std::span<const double> x,
                                                         const Matrix& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    double d = squared_distance(x, centers.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

}  // namespace lada::kernels::rows
