#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "lada/classifier.hpp"
#include "lada/dataset.hpp"
#include "lada/matrix.hpp"
#include "lada/rng.hpp"

namespace testing {

inline lada::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  lada::Matrix m;
  for (const auto& r : rows) m.append_row(std::vector<double>(r));
  return m;
}

inline lada::Matrix random_matrix(std::size_t rows, std::size_t cols, lada::Rng& rng, double scale = 1.0) {
  lada::Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal(0.0, scale);
  return m;
}

/// Random probability rows via softmax of Gaussian logits.
inline lada::Matrix random_probs(std::size_t rows, std::size_t classes, lada::Rng& rng) {
  lada::Matrix p(rows, classes);
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < classes; ++c) s += (p(i, c) = std::exp(rng.normal(0.0, 2.0)));
    for (std::size_t c = 0; c < classes; ++c) p(i, c) /= s;
  }
  return p;
}

inline std::vector<lada::Id> iota_ids(std::size_t n, lada::Id first = 0) {
  std::vector<lada::Id> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = first + i;
  return ids;
}

}  // namespace testing
