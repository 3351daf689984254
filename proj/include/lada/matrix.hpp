#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lada {

using Id = std::uint64_t;

/// Dense row-major matrix of doubles. Rows are samples throughout the
/// library, so row access is the primary interface.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void append_row(std::span<const double> values);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Rows of `m` picked by position, in the given order.
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> positions);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;
double norm(std::span<const double> a) noexcept;

/// Samples paired with their embedding rows; `ids[i]` labels `x.row(i)`.
struct PointSet {
  std::vector<Id> ids;
  Matrix x;

  std::size_t size() const noexcept { return ids.size(); }
};

}  // namespace lada
