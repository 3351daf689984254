#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lada/matrix.hpp"

namespace lada {

enum class Domain : std::uint8_t { Source = 0, Target = 1 };

std::string_view domain_name(Domain d) noexcept;

struct Sample {
  Id id = 0;
  std::vector<double> feature;
  std::optional<int> label;
  Domain domain = Domain::Source;

  bool operator==(const Sample&) const = default;
};

class Dataset;

/// Ground-truth target labels, reachable only through counted accessors.
/// Selection code receives datasets but never calls these; tests assert the
/// counters stay at zero across selection.
class LabelOracle {
 public:
  void store(Id id, std::optional<int> label) { hidden_[id] = label; }
  void erase(Id id) { hidden_.erase(id); }
  bool contains(Id id) const { return hidden_.count(id) != 0; }

  /// Query the annotator for one label. Counted.
  std::optional<int> reveal(Id id);
  /// Labels for scoring a model, in the order of `ids`. Counted once per call.
  std::vector<std::optional<int>> labels_for_evaluation(std::span<const Id> ids) const;

  std::size_t reveal_count() const noexcept { return reveals_; }
  std::size_t evaluation_count() const noexcept { return evaluations_; }

  friend bool operator==(const LabelOracle& a, const LabelOracle& b) {
    return a.hidden_ == b.hidden_;
  }

 private:
  friend struct OracleAccess;

  std::map<Id, std::optional<int>> hidden_;
  std::size_t reveals_ = 0;
  mutable std::size_t evaluations_ = 0;
};

/// Uncounted access for dataio internals (persistence, resampling).
struct OracleAccess {
  static std::optional<int> peek(const LabelOracle& o, Id id);
};

/// Source samples carry labels. Target samples carry a label only once it
/// has been revealed through `reveal_labels`; the truth lives in `oracle`.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int dim, int num_classes) : dim_(dim), num_classes_(num_classes) {}

  int dim() const noexcept { return dim_; }
  int num_classes() const noexcept { return num_classes_; }

  std::vector<Sample> source;
  std::vector<Sample> target;
  std::set<Id> target_labeled_ids;
  LabelOracle oracle;
  /// Upper bound on |target_labeled_ids|; unset means unbounded.
  std::optional<std::size_t> label_budget;

  /// Append a target sample whose ground truth is hidden behind the oracle.
  void add_target(Id id, std::vector<double> feature, std::optional<int> truth);
  void add_source(Id id, std::vector<double> feature, int label);

  /// Query the oracle for `ids` and move them into D_tl.
  void reveal_labels(std::span<const Id> ids);

  std::vector<Id> unlabeled_target_ids() const;
  std::vector<Id> target_ids() const;
  const Sample& target_sample(Id id) const;

  /// Checks the type invariants; throws DataError on violation.
  void validate() const;

  bool operator==(const Dataset&) const = default;

 private:
  int dim_ = 0;
  int num_classes_ = 0;
  std::map<Id, std::size_t> target_pos_;
};

Matrix feature_matrix(std::span<const Sample> samples);

/// Features keyed by id for random access.
struct FeatureTable {
  std::vector<Id> ids;
  Matrix x;
  std::unordered_map<Id, std::size_t> rows;

  static FeatureTable from(std::span<const Sample> samples);
  std::size_t size() const noexcept { return ids.size(); }
  /// Throws DataError for an unknown id.
  std::size_t row_of(Id id) const;
  Matrix gather(std::span<const Id> which) const;
};
std::vector<int> label_vector(std::span<const Sample> samples);

}  // namespace lada
