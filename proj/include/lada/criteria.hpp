#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lada/matrix.hpp"
#include "lada/neighbors.hpp"
#include "lada/rng.hpp"

namespace lada {

/// Per-sample query scores; higher means more worth labeling.
struct ScoreVector {
  std::string criterion;
  std::vector<Id> ids;
  std::vector<double> scores;

  std::size_t size() const noexcept { return ids.size(); }
};

/// Local inconsistency: LI(x) = -(1/K) sum_k w_k p(x_k)^T p(x).
/// `probs.row(i)` belongs to the index's i-th sample. The 1/K factor is kept
/// even though the weights are already normalized.
ScoreVector li_raw(const Matrix& probs, const NeighborIndex& index);

/// out(x) = li(x) + (1/K) sum_k w_k li(x_k), evaluated from the input vector
/// as a whole. The result is ordered like the index.
ScoreVector li_smooth(const ScoreVector& li, const NeighborIndex& index);

enum class PointwiseKind { Entropy, Margin, Confidence, Random };

/// entropy = -sum p ln p (0 ln 0 = 0); margin = -(p(1) - p(2));
/// confidence = -max p; random = U(0, 1) drawn in row order.
ScoreVector score_pointwise(const Matrix& probs, std::span<const Id> ids, PointwiseKind kind,
                            Rng& rng);

/// NAU = NP * NA: NP is the entropy of the neighbors' argmax labels,
/// NA the mean cosine similarity to the neighbors.
ScoreVector score_nau(const Matrix& probs, const NeighborIndex& index);

double entropy(std::span<const double> p) noexcept;

/// The k highest scores (ties to the lower id), best first.
std::vector<Id> top_k(const ScoreVector& scores, std::size_t k);

/// k-center greedy: repeatedly take the unlabeled point farthest (Euclidean)
/// from every labeled or already-selected point. Ties go to the lower id;
/// with no labeled points the lowest unlabeled id seeds the set. `pool`
/// holds the embeddings of every id named in `labeled` and `unlabeled`.
std::vector<Id> coreset_select(const PointSet& pool, std::span<const Id> labeled,
                               std::span<const Id> unlabeled, std::size_t b);

/// Gradient embedding of the cross-entropy at the argmax pseudo-label with
/// respect to a linear head: (p - onehot(argmax p)) (x) f(x), length C * e.
Matrix badge_embeddings(const Matrix& embeddings, const Matrix& probs);

/// BADGE: k-means++ seeding over gradient embeddings. Candidates whose
/// gradient embedding is exactly zero carry no mass, so they are only taken
/// once every nonzero candidate is exhausted.
std::vector<Id> badge_select(const PointSet& unlabeled, const Matrix& probs, std::size_t b,
                             Rng& rng);

/// CLUE: entropy-weighted k-means (k = b) over all unlabeled embeddings, then
/// the distinct sample nearest each centroid. All-zero entropies fall back to
/// uniform weights.
std::vector<Id> clue_select(const PointSet& unlabeled, const Matrix& probs, std::size_t b,
                            Rng& rng);

}  // namespace lada
