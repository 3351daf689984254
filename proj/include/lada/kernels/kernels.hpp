#pragma once

// Row-parallel numeric kernels. Each kernel exists twice with identical
// per-row arithmetic: `serial` is the reference kept for tests and
// benchmarks, `parallel` distributes rows over OpenMP threads. Both variants
// produce bitwise-identical output.

#include <cstddef>
#include <span>
#include <vector>

#include "lada/matrix.hpp"

namespace lada::kernels {

#define LADA_DECLARE_KERNELS                                                                    \
  /* out(i, j) = bias[j] + <x.row(i), w.row(j)>, optionally passed through ReLU. */             \
  void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, bool relu,       \
              Matrix& out);                                                                     \
  /* In-place row softmax. */                                                                   \
  void softmax_rows(Matrix& logits);                                                            \
  /* Top-k rows by dot product (rows of `unit` are unit vectors), self excluded, ordered by   \
     similarity descending then id ascending. Results are n*k row-major. */                     \
  void cosine_topk(const Matrix& unit, std::span<const Id> ids, std::size_t k,                 \
                   std::vector<std::size_t>& neighbor_pos, std::vector<double>& similarity);    \
  /* Nearest center per row by squared Euclidean distance, ties to the lower center. */         \
  void nearest_center(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& assign, \
                      std::vector<double>& dist2);                                              \
  /* min_dist2[i] = min(min_dist2[i], |x_i - center|^2) */                                      \
  void relax_min_distance(const Matrix& x, std::span<const double> center,                      \
                          std::vector<double>& min_dist2);

namespace serial {
LADA_DECLARE_KERNELS
}  // namespace serial

namespace parallel {
LADA_DECLARE_KERNELS
}  // namespace parallel

#undef LADA_DECLARE_KERNELS

}  // namespace lada::kernels
