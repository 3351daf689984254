#include "lada/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include "lada/classifier.hpp"
#include "lada/error.hpp"
#include "lada/kernels/kernels.hpp"
#include "lada/kmeans.hpp"

namespace lada {

namespace {

void require_rows(const Matrix& probs, std::size_t n, const char* who) {
  if (probs.rows() != n) {
    throw ConfigError(std::string(who) + ": expected " + std::to_string(n) + " probability rows, got " +
                      std::to_string(probs.rows()));
  }
}

ScoreVector indexed_scores(const NeighborIndex& index, std::string name) {
  ScoreVector out;
  out.criterion = std::move(name);
  out.ids.assign(index.ids().begin(), index.ids().end());
  out.scores.assign(index.size(), 0.0);
  return out;
}

}  // namespace

double entropy(std::span<const double> p) noexcept {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

ScoreVector li_raw(const Matrix& probs, const NeighborIndex& index) {
  require_rows(probs, index.size(), "li_raw");
  auto out = indexed_scores(index, "LI");
  const double inv_k = 1.0 / static_cast<double>(index.k());
  for (std::size_t i = 0; i < index.size(); ++i) {
    double acc = 0.0;
    for (const auto& nb : index.row(i)) acc += nb.weight * dot(probs.row(nb.position), probs.row(i));
    out.scores[i] = -inv_k * acc;
  }
  return out;
}

ScoreVector li_smooth(const ScoreVector& li, const NeighborIndex& index) {
  std::vector<double> by_pos(index.size());
  std::vector<char> seen(index.size(), 0);
  for (std::size_t i = 0; i < li.size(); ++i) {
    const auto p = index.position_of(li.ids[i]);
    by_pos[p] = li.scores[i];
    seen[p] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw DataError("li_smooth: score vector does not cover every indexed sample");
  }
  auto out = indexed_scores(index, li.criterion + "-smooth");
  const double inv_k = 1.0 / static_cast<double>(index.k());
  for (std::size_t i = 0; i < index.size(); ++i) {
    double acc = 0.0;
    for (const auto& nb : index.row(i)) acc += nb.weight * by_pos[nb.position];
    out.scores[i] = by_pos[i] + inv_k * acc;
  }
  return out;
}

ScoreVector score_pointwise(const Matrix& probs, std::span<const Id> ids, PointwiseKind kind,
                            Rng& rng) {
  require_rows(probs, ids.size(), "score_pointwise");
  ScoreVector out;
  out.ids.assign(ids.begin(), ids.end());
  out.scores.resize(ids.size());
  switch (kind) {
    case PointwiseKind::Entropy: out.criterion = "ENT"; break;
    case PointwiseKind::Margin: out.criterion = "MAR"; break;
    case PointwiseKind::Confidence: out.criterion = "CONF"; break;
    case PointwiseKind::Random: out.criterion = "RANDOM"; break;
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto p = probs.row(i);
    switch (kind) {
      case PointwiseKind::Entropy:
        out.scores[i] = entropy(p);
        break;
      case PointwiseKind::Margin: {
        double first = -1.0, second = -1.0;
        for (double v : p) {
          if (v > first) {
            second = first;
            first = v;
          } else if (v > second) {
            second = v;
          }
        }
        out.scores[i] = p.size() < 2 ? -1.0 : -(first - second);
        break;
      }
      case PointwiseKind::Confidence:
        out.scores[i] = -*std::max_element(p.begin(), p.end());
        break;
      case PointwiseKind::Random:
        out.scores[i] = rng.uniform();
        break;
    }
  }
  return out;
}

ScoreVector score_nau(const Matrix& probs, const NeighborIndex& index) {
  require_rows(probs, index.size(), "score_nau");
  auto out = indexed_scores(index, "NAU");
  const double k = static_cast<double>(index.k());
  std::unordered_map<std::size_t, std::size_t> counts;
  for (std::size_t i = 0; i < index.size(); ++i) {
    counts.clear();
    double affinity = 0.0;
    for (const auto& nb : index.row(i)) {
      ++counts[argmax(probs.row(nb.position))];
      affinity += nb.similarity;
    }
    double purity = 0.0;
    for (const auto& [label, c] : counts) {
      const double q = static_cast<double>(c) / k;
      purity -= q * std::log(q);
    }
    out.scores[i] = purity * (affinity / k);
  }
  return out;
}

std::vector<Id> top_k(const ScoreVector& scores, std::size_t k) {
  if (k > scores.size()) throw ConfigError("top_k: k exceeds score count");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
                      return scores.ids[a] < scores.ids[b];
                    });
  std::vector<Id> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.push_back(scores.ids[order[r]]);
  return out;
}

std::vector<Id> coreset_select(const PointSet& pool, std::span<const Id> labeled,
                               std::span<const Id> unlabeled, std::size_t b) {
  if (b > unlabeled.size()) {
    throw ConfigError("coreset: b=" + std::to_string(b) + " exceeds unlabeled count " +
                      std::to_string(unlabeled.size()));
  }
  std::unordered_map<Id, std::size_t> row_of;
  for (std::size_t i = 0; i < pool.size(); ++i) row_of.emplace(pool.ids[i], i);
  auto row = [&](Id id) {
    auto it = row_of.find(id);
    if (it == row_of.end()) throw DataError("coreset: id " + std::to_string(id) + " has no embedding");
    return it->second;
  };

  std::vector<Id> cand(unlabeled.begin(), unlabeled.end());
  std::sort(cand.begin(), cand.end());
  std::vector<std::size_t> cand_rows;
  for (Id id : cand) cand_rows.push_back(row(id));
  const Matrix u = gather_rows(pool.x, cand_rows);

  std::vector<Id> centers(labeled.begin(), labeled.end());
  std::sort(centers.begin(), centers.end());
  std::vector<double> min_dist(cand.size(), std::numeric_limits<double>::infinity());
  for (Id id : centers) kernels::parallel::relax_min_distance(u, pool.x.row(row(id)), min_dist);

  std::vector<Id> out;
  std::vector<char> taken(cand.size(), 0);
  auto pick = [&](std::size_t i) {
    taken[i] = 1;
    out.push_back(cand[i]);
    kernels::parallel::relax_min_distance(u, u.row(i), min_dist);
  };
  if (b > 0 && centers.empty()) pick(0);
  while (out.size() < b) {
    std::size_t best = cand.size();
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (taken[i]) continue;
      if (best == cand.size() || min_dist[i] > min_dist[best]) best = i;
    }
    pick(best);
  }
  return out;
}

Matrix badge_embeddings(const Matrix& embeddings, const Matrix& probs) {
  require_rows(probs, embeddings.rows(), "badge");
  const std::size_t C = probs.cols(), e = embeddings.cols();
  Matrix g(embeddings.rows(), C * e);
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    auto p = probs.row(i);
    const auto y = argmax(p);
    auto f = embeddings.row(i);
    auto out = g.row(i);
    for (std::size_t c = 0; c < C; ++c) {
      const double coef = p[c] - (c == y ? 1.0 : 0.0);
      for (std::size_t j = 0; j < e; ++j) out[c * e + j] = coef * f[j];
    }
  }
  return g;
}

std::vector<Id> badge_select(const PointSet& unlabeled, const Matrix& probs, std::size_t b,
                             Rng& rng) {
  if (b > unlabeled.size()) throw ConfigError("badge: b exceeds unlabeled count");
  const Matrix g = badge_embeddings(unlabeled.x, probs);
  std::vector<double> mass(g.rows());
  for (std::size_t i = 0; i < g.rows(); ++i) {
    auto r = g.row(i);
    mass[i] = std::any_of(r.begin(), r.end(), [](double v) { return v != 0.0; }) ? 1.0 : 0.0;
  }
  std::vector<Id> out;
  for (auto i : kmeanspp_seeds(g, mass, b, rng)) out.push_back(unlabeled.ids[i]);
  return out;
}

std::vector<Id> clue_select(const PointSet& unlabeled, const Matrix& probs, std::size_t b,
                            Rng& rng) {
  if (b > unlabeled.size()) throw ConfigError("clue: b exceeds unlabeled count");
  require_rows(probs, unlabeled.size(), "clue");
  if (b == 0) return {};
  std::vector<double> w(unlabeled.size());
  bool any = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = entropy(probs.row(i));
    any = any || w[i] > 0.0;
  }
  if (!any) std::fill(w.begin(), w.end(), 1.0);
  const auto km = kmeans(unlabeled.x, w, b, rng);
  std::vector<Id> out;
  for (auto i : nearest_distinct(unlabeled.x, unlabeled.ids, km.centroids)) {
    out.push_back(unlabeled.ids[i]);
  }
  return out;
}

}  // namespace lada
