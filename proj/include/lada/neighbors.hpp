#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "lada/matrix.hpp"

namespace lada {

struct Neighbor {
  Id id = 0;
  std::size_t position = 0;  // row of the neighbor inside the index
  double similarity = 0.0;   // cosine similarity to the query row
  double weight = 0.0;       // normalized, non-negative; a row's weights sum to 1
};

/// Exact top-K cosine neighbors of every indexed sample, self excluded,
/// ordered by similarity descending with ties broken by ascending id.
///
/// Weights are max(cos, 0) + 1e-12 normalized over the K neighbors.
class NeighborIndex {
 public:
  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::span<const Id> ids() const noexcept { return ids_; }

  std::span<const Neighbor> row(std::size_t position) const noexcept {
    return {entries_.data() + position * k_, k_};
  }
  bool contains(Id id) const { return position_.count(id) != 0; }
  /// Throws DataError for an id not in the index.
  std::size_t position_of(Id id) const;

 private:
  friend NeighborIndex build_index(const Matrix&, std::span<const Id>, std::size_t);

  std::size_t k_ = 0;
  std::vector<Id> ids_;
  std::vector<Neighbor> entries_;
  std::unordered_map<Id, std::size_t> position_;
};

inline constexpr double kNeighborWeightEpsilon = 1e-12;

/// Brute-force O(n^2 d) build; rows are distributed over threads.
/// Requires 1 <= k < n and no zero-norm row.
NeighborIndex build_index(const Matrix& embeddings, std::span<const Id> ids, std::size_t k);

std::span<const Neighbor> neighbors_of(const NeighborIndex& index, Id id);

/// Replaces every all-zero row (a fully inactive ReLU layer) with the
/// uniform unit direction so the rows can be indexed. Returns the count.
std::size_t fill_zero_rows(Matrix& embeddings);

}  // namespace lada
