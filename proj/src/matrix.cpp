#include "lada/matrix.hpp"

#include <cassert>
#include <cmath>

namespace lada {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  assert(values.size() == cols_);
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> positions) {
  Matrix out(positions.size(), m.cols());
  for (std::size_t r = 0; r < positions.size(); ++r) {
    auto src = m.row(positions[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

}  // namespace lada
