#include "lada/dataset.hpp"

#include <string>
#include <unordered_set>

#include "lada/error.hpp"

namespace lada {

std::string_view domain_name(Domain d) noexcept {
  return d == Domain::Source ? "source" : "target";
}

std::optional<int> LabelOracle::reveal(Id id) {
  auto it = hidden_.find(id);
  if (it == hidden_.end()) throw DataError("oracle: unknown target id " + std::to_string(id));
  ++reveals_;
  return it->second;
}

std::vector<std::optional<int>> LabelOracle::labels_for_evaluation(std::span<const Id> ids) const {
  ++evaluations_;
  std::vector<std::optional<int>> out;
  out.reserve(ids.size());
  for (Id id : ids) {
    auto it = hidden_.find(id);
    out.push_back(it == hidden_.end() ? std::nullopt : it->second);
  }
  return out;
}

std::optional<int> OracleAccess::peek(const LabelOracle& o, Id id) {
  auto it = o.hidden_.find(id);
  return it == o.hidden_.end() ? std::nullopt : it->second;
}

void Dataset::add_target(Id id, std::vector<double> feature, std::optional<int> truth) {
  target_pos_[id] = target.size();
  target.push_back(Sample{id, std::move(feature), std::nullopt, Domain::Target});
  oracle.store(id, truth);
}

void Dataset::add_source(Id id, std::vector<double> feature, int label) {
  source.push_back(Sample{id, std::move(feature), label, Domain::Source});
}

void Dataset::reveal_labels(std::span<const Id> ids) {
  for (Id id : ids) {
    auto it = target_pos_.find(id);
    if (it == target_pos_.end()) throw DataError("reveal: unknown target id " + std::to_string(id));
    if (target_labeled_ids.count(id)) {
      throw DataError("reveal: target id " + std::to_string(id) + " already labeled");
    }
    if (label_budget && target_labeled_ids.size() + 1 > *label_budget) {
      throw DataError("reveal: label budget of " + std::to_string(*label_budget) + " exhausted");
    }
    auto label = oracle.reveal(id);
    if (!label) throw DataError("reveal: oracle has no label for id " + std::to_string(id));
    target[it->second].label = label;
    target_labeled_ids.insert(id);
  }
}

std::vector<Id> Dataset::unlabeled_target_ids() const {
  std::vector<Id> out;
  for (const auto& s : target) {
    if (!target_labeled_ids.count(s.id)) out.push_back(s.id);
  }
  return out;
}

std::vector<Id> Dataset::target_ids() const {
  std::vector<Id> out;
  out.reserve(target.size());
  for (const auto& s : target) out.push_back(s.id);
  return out;
}

const Sample& Dataset::target_sample(Id id) const {
  auto it = target_pos_.find(id);
  if (it == target_pos_.end()) throw DataError("unknown target id " + std::to_string(id));
  return target[it->second];
}

void Dataset::validate() const {
  if (dim_ <= 0 || num_classes_ <= 0) throw DataError("dataset: dim and class count must be positive");
  std::unordered_set<Id> seen;
  auto check = [&](const Sample& s) {
    if (!seen.insert(s.id).second) throw DataError("dataset: duplicate id " + std::to_string(s.id));
    if (s.feature.size() != static_cast<std::size_t>(dim_)) {
      throw DataError("dataset: sample " + std::to_string(s.id) + " has wrong feature length");
    }
    if (s.label && (*s.label < 0 || *s.label >= num_classes_)) {
      throw DataError("dataset: sample " + std::to_string(s.id) + " label out of range");
    }
  };
  for (const auto& s : source) {
    check(s);
    if (!s.label) throw DataError("dataset: source sample " + std::to_string(s.id) + " unlabeled");
  }
  for (const auto& s : target) check(s);
  for (Id id : target_labeled_ids) {
    auto it = target_pos_.find(id);
    if (it == target_pos_.end()) throw DataError("dataset: labeled id not in target");
    if (!target[it->second].label) throw DataError("dataset: labeled id without revealed label");
  }
  if (label_budget && target_labeled_ids.size() > *label_budget) {
    throw DataError("dataset: labeled set exceeds budget");
  }
}

Matrix feature_matrix(std::span<const Sample> samples) {
  if (samples.empty()) return {};
  Matrix m(samples.size(), samples.front().feature.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy(samples[i].feature.begin(), samples[i].feature.end(), m.row(i).begin());
  }
  return m;
}

FeatureTable FeatureTable::from(std::span<const Sample> samples) {
  FeatureTable t;
  t.x = feature_matrix(samples);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    t.ids.push_back(samples[i].id);
    t.rows.emplace(samples[i].id, i);
  }
  return t;
}

std::size_t FeatureTable::row_of(Id id) const {
  auto it = rows.find(id);
  if (it == rows.end()) throw DataError("feature table: unknown id " + std::to_string(id));
  return it->second;
}

Matrix FeatureTable::gather(std::span<const Id> which) const {
  std::vector<std::size_t> pos;
  pos.reserve(which.size());
  for (Id id : which) pos.push_back(row_of(id));
  return gather_rows(x, pos);
}

std::vector<int> label_vector(std::span<const Sample> samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label.value_or(-1));
  return out;
}

}  // namespace lada
