#include "lada/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>

#include "lada/error.hpp"
#include "lada/kmeans.hpp"
#include "lada/log.hpp"

namespace lada {

std::string_view criterion_name(Criterion c) noexcept {
  switch (c) {
    case Criterion::Random: return "RANDOM";
    case Criterion::Entropy: return "ENT";
    case Criterion::Margin: return "MAR";
    case Criterion::Confidence: return "CONF";
    case Criterion::Nau: return "NAU";
    case Criterion::CoreSet: return "CoreSet";
    case Criterion::Badge: return "BADGE";
    case Criterion::Clue: return "CLUE";
    case Criterion::Las: return "LAS";
    case Criterion::LasNoDiv: return "LAS-noDiv";
  }
  return "?";
}

Criterion parse_criterion(std::string_view name) {
  std::string key(name);
  for (char& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  static const std::unordered_map<std::string, Criterion> table = {
      {"random", Criterion::Random},     {"ran", Criterion::Random},
      {"entropy", Criterion::Entropy},   {"ent", Criterion::Entropy},
      {"margin", Criterion::Margin},     {"mar", Criterion::Margin},
      {"confidence", Criterion::Confidence}, {"conf", Criterion::Confidence},
      {"nau", Criterion::Nau},           {"coreset", Criterion::CoreSet},
      {"badge", Criterion::Badge},       {"clue", Criterion::Clue},
      {"las", Criterion::Las},           {"las-nodiv", Criterion::LasNoDiv},
      {"las_nodiv", Criterion::LasNoDiv},
  };
  auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown criterion '" + std::string(name) + "'");
  return it->second;
}

bool needs_neighbor_index(Criterion c) noexcept {
  return c == Criterion::Las || c == Criterion::LasNoDiv || c == Criterion::Nau;
}

int oversampling_ratio(double budget_fraction, DatasetKind kind) {
  const double raw = 55.0 / (100.0 * budget_fraction) - 1.0;
  int m = std::max(0, static_cast<int>(std::ceil(raw - 1e-9)));
  if (kind == DatasetKind::HugePerClass) m = static_cast<int>(std::ceil(m / 2.0));
  return m;
}

RoundPlan plan_budget(std::size_t n_target, double budget_fraction, int rounds, DatasetKind kind,
                      int first_query_epoch, int query_spacing) {
  if (!(budget_fraction > 0.0 && budget_fraction <= 1.0)) {
    throw ConfigError("budget fraction must be in (0, 1]");
  }
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (query_spacing < 1) throw ConfigError("query spacing must be >= 1");
  RoundPlan plan;
  plan.budget_fraction = budget_fraction;
  plan.rounds = rounds;
  plan.total = static_cast<std::size_t>(
      std::floor(budget_fraction * static_cast<double>(n_target) + 1e-9));
  if (plan.total < static_cast<std::size_t>(rounds)) {
    throw ConfigError("budget of " + std::to_string(plan.total) + " samples is smaller than " +
                      std::to_string(rounds) + " rounds");
  }
  const std::size_t per = plan.total / static_cast<std::size_t>(rounds);
  plan.per_round.assign(static_cast<std::size_t>(rounds), per);
  plan.per_round.back() += plan.total % static_cast<std::size_t>(rounds);
  plan.oversampling = oversampling_ratio(budget_fraction, kind);
  for (int r = 0; r < rounds; ++r) plan.query_epochs.push_back(first_query_epoch + r * query_spacing);
  return plan;
}

std::vector<Id> diverse_select(const PointSet& unlabeled, const ScoreVector& scores, std::size_t b,
                               int oversampling, Rng& rng) {
  if (b == 0) return {};
  if (b > unlabeled.size()) throw ConfigError("diverse_select: b exceeds unlabeled count");
  std::size_t want = static_cast<std::size_t>(1 + std::max(0, oversampling)) * b;
  if (want > scores.size()) {
    warn("diverse_select: only " + std::to_string(scores.size()) + " unlabeled samples for " +
         std::to_string(want) + " candidates; using all of them");
    want = scores.size();
  }
  const auto candidates = top_k(scores, want);

  std::unordered_map<Id, std::size_t> row_of;
  for (std::size_t i = 0; i < unlabeled.size(); ++i) row_of.emplace(unlabeled.ids[i], i);
  std::vector<std::size_t> rows;
  rows.reserve(candidates.size());
  for (Id id : candidates) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw DataError("diverse_select: scored id " + std::to_string(id) + " not unlabeled");
    rows.push_back(it->second);
  }
  const Matrix x = gather_rows(unlabeled.x, rows);
  const auto km = kmeans(x, {}, b, rng);
  std::vector<Id> out;
  for (auto i : nearest_distinct(x, candidates, km.centroids)) out.push_back(candidates[i]);
  return out;
}

namespace {

struct Pool {
  std::vector<Id> ids;
  ForwardResult fwd;
};

// Unlabeled pool, ordered like the index when one is given.
Pool unlabeled_pool(Criterion criterion, const Classifier& model, const Dataset& data,
                    const NeighborIndex* index, const char* who) {
  Pool pool;
  pool.ids = data.unlabeled_target_ids();
  if (index) {
    if (index->size() != pool.ids.size()) {
      throw ConfigError(std::string(who) + ": neighbor index does not cover the unlabeled pool");
    }
    for (Id id : pool.ids) {
      if (!index->contains(id)) throw ConfigError(std::string(who) + ": neighbor index misses unlabeled id");
    }
    pool.ids.assign(index->ids().begin(), index->ids().end());
  } else if (needs_neighbor_index(criterion)) {
    throw ConfigError(std::string(who) + ": " + std::string(criterion_name(criterion)) +
                      " needs a neighbor index");
  }
  std::vector<Sample> samples;
  samples.reserve(pool.ids.size());
  for (Id id : pool.ids) samples.push_back(data.target_sample(id));
  pool.fwd = model.forward(feature_matrix(samples));
  return pool;
}

std::optional<PointwiseKind> pointwise_kind(Criterion c) {
  switch (c) {
    case Criterion::Random: return PointwiseKind::Random;
    case Criterion::Entropy: return PointwiseKind::Entropy;
    case Criterion::Margin: return PointwiseKind::Margin;
    case Criterion::Confidence: return PointwiseKind::Confidence;
    default: return std::nullopt;
  }
}

std::vector<Id> set_valued(Criterion criterion, const Classifier& model, const Dataset& data, const Pool& pool,
                           std::size_t b, Rng& rng) {
  PointSet points{pool.ids, pool.fwd.embedding};
  switch (criterion) {
    case Criterion::CoreSet: {
      PointSet everything{data.target_ids(), model.embed(feature_matrix(data.target))};
      std::vector<Id> labeled(data.target_labeled_ids.begin(), data.target_labeled_ids.end());
      return coreset_select(everything, labeled, pool.ids, b);
    }
    case Criterion::Badge:
      return badge_select(points, pool.fwd.probs, b, rng);
    case Criterion::Clue:
      return clue_select(points, pool.fwd.probs, b, rng);
    default:
      throw ConfigError("select: criterion is not set-valued");
  }
}

}  // namespace

bool is_set_valued(Criterion c) noexcept {
  return c == Criterion::CoreSet || c == Criterion::Badge || c == Criterion::Clue;
}

std::vector<Id> select(Criterion criterion, const Classifier& model, const Dataset& data,
                       const NeighborIndex* index, const RoundPlan& plan, int round, Rng& rng) {
  if (round < 0 || round >= plan.rounds) throw ConfigError("select: round out of range");
  const std::size_t b = plan.round_size(round);
  const Pool pool = unlabeled_pool(criterion, model, data, index, "select");
  if (b > pool.ids.size()) throw ConfigError("select: round budget exceeds unlabeled pool");

  if (is_set_valued(criterion)) return set_valued(criterion, model, data, pool, b, rng);
  if (criterion == Criterion::Las) {
    const auto smoothed = li_smooth(li_raw(pool.fwd.probs, *index), *index);
    return diverse_select(PointSet{pool.ids, pool.fwd.embedding}, smoothed, b, plan.oversampling, rng);
  }
  return top_k(score_criterion(criterion, model, data, index, b, rng), b);
}

ScoreVector score_criterion(Criterion criterion, const Classifier& model, const Dataset& data,
                            const NeighborIndex* index, std::size_t b, Rng& rng) {
  const Pool pool = unlabeled_pool(criterion, model, data, index, "score");
  if (auto kind = pointwise_kind(criterion)) return score_pointwise(pool.fwd.probs, pool.ids, *kind, rng);
  switch (criterion) {
    case Criterion::Las:
    case Criterion::LasNoDiv: {
      auto smoothed = li_smooth(li_raw(pool.fwd.probs, *index), *index);
      smoothed.criterion = std::string(criterion_name(criterion));
      return smoothed;
    }
    case Criterion::Nau:
      return score_nau(pool.fwd.probs, *index);
    default:
      break;
  }
  if (b > pool.ids.size()) throw ConfigError("score: set size exceeds unlabeled pool");
  const auto chosen = set_valued(criterion, model, data, pool, b, rng);
  const std::set<Id> picked(chosen.begin(), chosen.end());
  ScoreVector out;
  out.criterion = std::string(criterion_name(criterion));
  out.ids = pool.ids;
  for (Id id : pool.ids) out.scores.push_back(picked.count(id) ? 1.0 : 0.0);
  return out;
}

}  // namespace lada
