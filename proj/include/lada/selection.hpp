#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "lada/classifier.hpp"
#include "lada/criteria.hpp"
#include "lada/dataset.hpp"
#include "lada/neighbors.hpp"

namespace lada {

enum class Criterion { Random, Entropy, Margin, Confidence, Nau, CoreSet, Badge, Clue, Las, LasNoDiv };

std::string_view criterion_name(Criterion c) noexcept;
/// Case-insensitive; accepts display names and common aliases
/// ("entropy", "margin", "conf", "las-nodiv", ...).
Criterion parse_criterion(std::string_view name);
/// True for criteria that read the neighbor index.
bool needs_neighbor_index(Criterion c) noexcept;

/// Standard benchmarks vs. datasets with very many samples per class, for
/// which the oversampling ratio is halved.
enum class DatasetKind { Standard, HugePerClass };

struct RoundPlan {
  double budget_fraction = 0.0;
  int rounds = 0;
  std::size_t total = 0;                // floor(B * n_target)
  std::vector<std::size_t> per_round;   // the last round absorbs the remainder
  int oversampling = 0;                 // M
  std::vector<int> query_epochs;        // strictly increasing, one per round

  std::size_t round_size(int round) const { return per_round.at(static_cast<std::size_t>(round)); }
  std::size_t candidate_count(int round) const {
    return static_cast<std::size_t>(1 + oversampling) * round_size(round);
  }
};

/// M = ceil(55 / (100 B) - 1), clamped at 0; for HugePerClass the integer
/// is then halved and rounded up.
int oversampling_ratio(double budget_fraction, DatasetKind kind = DatasetKind::Standard);

/// Budget split into R rounds queried at epochs first, first + spacing, ...
RoundPlan plan_budget(std::size_t n_target, double budget_fraction, int rounds,
                      DatasetKind kind = DatasetKind::Standard, int first_query_epoch = 10,
                      int query_spacing = 2);

/// LAS second stage: keep the (1 + M) b best-scoring unlabeled samples (ties
/// to the lower id), run k-means with k = b on their embeddings and return
/// the distinct candidate nearest each centroid. `scores` must name only ids
/// in `unlabeled`. If fewer than (1 + M) b samples exist the candidate set
/// shrinks to all of them and a warning is issued.
std::vector<Id> diverse_select(const PointSet& unlabeled, const ScoreVector& scores, std::size_t b,
                               int oversampling, Rng& rng);

/// Picks round `round`'s query set from the unlabeled target pool.
/// `index` must be built over the current embeddings of exactly the
/// unlabeled target ids; it may be null for criteria that do not use it.
/// Never consults the label oracle.
std::vector<Id> select(Criterion criterion, const Classifier& model, const Dataset& data,
                       const NeighborIndex* index, const RoundPlan& plan, int round, Rng& rng);

/// Scores over the unlabeled pool, higher = more worth querying. LAS and
/// LAS-noDiv report the smoothed local inconsistency. CoreSet, BADGE and
/// CLUE have no per-sample score: they report 1 for the `b` ids they would
/// pick and 0 elsewhere.
ScoreVector score_criterion(Criterion criterion, const Classifier& model, const Dataset& data,
                            const NeighborIndex* index, std::size_t b, Rng& rng);

/// CoreSet, BADGE and CLUE pick a set rather than ranking samples.
bool is_set_valued(Criterion c) noexcept;

}  // namespace lada
