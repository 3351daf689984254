#include <stdexcept>

#include "lada/kernels/kernels.hpp"
#include "lada/kernels/row_ops.hpp"

namespace lada::kernels::parallel {

void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, bool relu,
            Matrix& out) {
  if (out.rows() != x.rows() || out.cols() != w.rows()) out = Matrix(x.rows(), w.rows());
  const auto n = static_cast<long>(x.rows());
  #pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    rows::affine_row(x.row(static_cast<std::size_t>(i)), w, bias, relu,
                     out.row(static_cast<std::size_t>(i)));
  }
}

void softmax_rows(Matrix& logits) {
  const auto n = static_cast<long>(logits.rows());
  #pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) rows::softmax_row(logits.row(static_cast<std::size_t>(i)));
}

void cosine_topk(const Matrix& unit, std::span<const Id> ids, std::size_t k,
                 std::vector<std::size_t>& neighbor_pos, std::vector<double>& similarity) {
  if (k >= unit.rows()) throw std::invalid_argument("cosine_topk: k must be below row count");
  neighbor_pos.assign(unit.rows() * k, 0);
  similarity.assign(unit.rows() * k, 0.0);
  const auto n = static_cast<long>(unit.rows());
  #pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    rows::cosine_topk_row(unit, ids, r, k, std::span(neighbor_pos).subspan(r * k, k),
                          std::span(similarity).subspan(r * k, k));
  }
}

void nearest_center(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& assign,
                    std::vector<double>& dist2) {
  assign.assign(x.rows(), 0);
  dist2.assign(x.rows(), 0.0);
  const auto n = static_cast<long>(x.rows());
  #pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    auto [c, d] = rows::nearest_center_row(x.row(r), centers);
    assign[r] = c;
    dist2[r] = d;
  }
}

void relax_min_distance(const Matrix& x, std::span<const double> center,
                        std::vector<double>& min_dist2) {
  const auto n = static_cast<long>(x.rows());
  #pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    double d = squared_distance(x.row(r), center);
    if (d < min_dist2[r]) min_dist2[r] = d;
  }
}

}  // namespace lada::kernels::parallel
