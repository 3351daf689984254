#include "lada/neighbors.hpp"

#include <cmath>
#include <string>

#include "lada/error.hpp"
#include "lada/kernels/kernels.hpp"

namespace lada {

std::size_t NeighborIndex::position_of(Id id) const {
  auto it = position_.find(id);
  if (it == position_.end()) throw DataError("neighbors: id " + std::to_string(id) + " not indexed");
  return it->second;
}

NeighborIndex build_index(const Matrix& embeddings, std::span<const Id> ids, std::size_t k) {
  const std::size_t n = embeddings.rows();
  if (ids.size() != n) throw ConfigError("neighbors: ids/rows mismatch");
  if (k < 1) throw ConfigError("neighbors: K must be >= 1");
  if (k >= n) {
    throw ConfigError("neighbors: K=" + std::to_string(k) + " must be below sample count " +
                      std::to_string(n));
  }

  NeighborIndex index;
  index.k_ = k;
  index.ids_.assign(ids.begin(), ids.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (!index.position_.emplace(ids[i], i).second) {
      throw DataError("neighbors: duplicate id " + std::to_string(ids[i]));
    }
  }

  Matrix unit = embeddings;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = unit.row(i);
    const double len = norm(r);
    if (len == 0.0) throw DataError("neighbors: zero-norm embedding for id " + std::to_string(ids[i]));
    for (double& v : r) v /= len;
  }

  std::vector<std::size_t> pos;
  std::vector<double> sim;
  kernels::parallel::cosine_topk(unit, ids, k, pos, sim);

  index.entries_.resize(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      auto& e = index.entries_[i * k + r];
      e.position = pos[i * k + r];
      e.id = ids[e.position];
      e.similarity = sim[i * k + r];
      e.weight = (e.similarity > 0.0 ? e.similarity : 0.0) + kNeighborWeightEpsilon;
      total += e.weight;
    }
    for (std::size_t r = 0; r < k; ++r) index.entries_[i * k + r].weight /= total;
  }
  return index;
}

std::span<const Neighbor> neighbors_of(const NeighborIndex& index, Id id) {
  return index.row(index.position_of(id));
}

std::size_t fill_zero_rows(Matrix& embeddings) {
  if (embeddings.cols() == 0) return 0;
  const double u = 1.0 / std::sqrt(static_cast<double>(embeddings.cols()));
  std::size_t filled = 0;
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    auto r = embeddings.row(i);
    if (norm(r) != 0.0) continue;
    for (double& v : r) v = u;
    ++filled;
  }
  return filled;
}

}  // namespace lada
