#include "lada/anchor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "lada/error.hpp"

namespace lada {

std::string_view paa_mode_name(PaaMode m) noexcept {
  switch (m) {
    case PaaMode::Off: return "off";
    case PaaMode::Raa: return "raa";
    case PaaMode::Laa: return "laa";
  }
  return "?";
}

PaaMode parse_paa_mode(std::string_view name) {
  std::string key(name);
  for (char& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (key == "off" || key == "eq3" || key == "none") return PaaMode::Off;
  if (key == "raa") return PaaMode::Raa;
  if (key == "laa") return PaaMode::Laa;
  throw ConfigError("unknown PAA mode '" + std::string(name) + "' (expected off, raa or laa)");
}

void PAAConfig::validate() const {
  if (!(confidence_threshold > 0.0 && confidence_threshold <= 1.0)) {
    throw ConfigError("paa: confidence threshold must be in (0, 1]");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw ConfigError("paa: noise scale must be >= 0");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("paa: dropout must be in [0, 1)");
  if (k < 1) throw ConfigError("paa: K must be >= 1");
}

std::vector<Id> AnchorSet::entry_ids() const {
  std::vector<Id> ids;
  ids.reserve(entries_.size());
  for (const auto& e : entries_) ids.push_back(e.id);
  return ids;
}

std::size_t AnchorSet::queried_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](const auto& e) {
    return e.provenance == Provenance::Queried;
  }));
}

bool AnchorSet::add_entry(const AnchorEntry& e) {
  if (e.label < 0 || e.label >= num_classes()) throw ConfigError("anchor: label out of range");
  if (!members_.insert(e.id).second) return false;
  entry_pos_.emplace(e.id, entries_.size());
  entries_.push_back(e);
  ++counts_[static_cast<std::size_t>(e.label)];
  return true;
}

int AnchorSet::label_of(Id id) const {
  auto it = entry_pos_.find(id);
  if (it == entry_pos_.end()) throw DataError("anchor: id " + std::to_string(id) + " not in A");
  return entries_[it->second].label;
}

bool AnchorSet::add_supplement(const AnchorEntry& e) {
  if (e.label < 0 || e.label >= num_classes()) throw ConfigError("anchor: label out of range");
  if (!members_.insert(e.id).second) return false;
  supplement_.push_back(e);
  return true;
}

double AnchorSet::class_share(int c) const {
  if (entries_.empty()) return 0.0;
  return static_cast<double>(counts_.at(static_cast<std::size_t>(c))) /
         static_cast<double>(entries_.size());
}

double AnchorSet::min_share() const {
  if (entries_.empty() || counts_.empty()) return 0.0;
  return static_cast<double>(*std::min_element(counts_.begin(), counts_.end())) /
         static_cast<double>(entries_.size());
}

double AnchorSet::max_share() const {
  if (entries_.empty() || counts_.empty()) return 0.0;
  return static_cast<double>(*std::max_element(counts_.begin(), counts_.end())) /
         static_cast<double>(entries_.size());
}

AnchorSet init_anchor(std::span<const AnchorEntry> queried, int num_classes) {
  std::vector<AnchorEntry> sorted(queried.begin(), queried.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  AnchorSet a(num_classes);
  for (auto e : sorted) {
    e.provenance = Provenance::Queried;
    a.add_entry(e);
  }
  return a;
}

AnchorSet init_anchor(const Dataset& data) {
  std::vector<AnchorEntry> queried;
  for (Id id : data.target_labeled_ids) {
    const auto& s = data.target_sample(id);
    if (!s.label) throw DataError("anchor: labeled target id without revealed label");
    queried.push_back({id, *s.label, Provenance::Queried});
  }
  return init_anchor(queried, data.num_classes());
}

double cbr_prob(const AnchorSet& anchor, int c) {
  if (anchor.size() == 0) return 0.0;
  const auto counts = anchor.class_counts();
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  return static_cast<double>(counts[static_cast<std::size_t>(c)] - *lo) / static_cast<double>(*hi);
}

std::vector<double> cbr_probs(const AnchorSet& anchor) {
  std::vector<double> q(static_cast<std::size_t>(anchor.num_classes()));
  for (int c = 0; c < anchor.num_classes(); ++c) q[static_cast<std::size_t>(c)] = cbr_prob(anchor, c);
  return q;
}

std::size_t paa_step(AnchorSet& anchor, std::span<const Id> batch, const PAAConfig& cfg,
                     const Classifier& model, const NeighborIndex* target_index,
                     const FeatureTable& target, Rng& rng) {
  if (cfg.mode == PaaMode::Off || batch.empty()) return 0;
  if (cfg.mode == PaaMode::Laa && target_index == nullptr) {
    throw ConfigError("paa: LAA needs a target neighbor index");
  }
  if (target.size() == 0) return 0;

  std::vector<Id> candidates;
  std::vector<double> xi;
  candidates.reserve(batch.size());
  xi.reserve(batch.size());
  for (Id a : batch) {
    if (cfg.mode == PaaMode::Laa) {
      const auto nbrs = neighbors_of(*target_index, a);
      candidates.push_back(nbrs[rng.index(nbrs.size())].id);
    } else {
      candidates.push_back(target.ids[rng.index(target.size())]);
    }
    xi.push_back(rng.uniform());
  }

  const auto q = cfg.class_balance ? cbr_probs(anchor)
                                   : std::vector<double>(static_cast<std::size_t>(anchor.num_classes()), 0.0);
  const Matrix probs = model.predict_proba(target.gather(candidates));
  std::size_t inserted = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto p = probs.row(i);
    const auto y = argmax(p);
    if (p[y] < cfg.confidence_threshold) continue;
    if (xi[i] < q[y]) continue;
    if (anchor.add_supplement({candidates[i], static_cast<int>(y), Provenance::Pseudo})) ++inserted;
  }
  return inserted;
}

AnchorSet merge_supplement(AnchorSet anchor) {
  for (const auto& e : anchor.supplement_) {
    anchor.entry_pos_.emplace(e.id, anchor.entries_.size());
    anchor.entries_.push_back(e);
    ++anchor.counts_[static_cast<std::size_t>(e.label)];
  }
  anchor.supplement_.clear();
  return anchor;
}

std::vector<double> coordinate_std(const Matrix& x) {
  std::vector<double> out(x.cols(), 0.0);
  if (x.rows() == 0) return out;
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    out[j] = std::sqrt(var / n);
  }
  return out;
}

std::vector<double> augment(std::span<const double> x, const AugmentParams& params, Rng& rng) {
  const double beta = rng.beta(params.beta_a, params.beta_b);
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double sigma = params.coordinate_std.empty() ? 1.0 : params.coordinate_std[j];
    double alpha = x[j];
    if (params.noise_scale * sigma > 0.0) alpha += rng.normal(0.0, params.noise_scale * sigma);
    if (params.dropout > 0.0 && rng.uniform() < params.dropout) alpha = 0.0;
    if (alpha != x[j]) out[j] = x[j] + (1.0 - beta) * (alpha - x[j]);
  }
  return out;
}

}  // namespace lada
