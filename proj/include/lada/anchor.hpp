#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lada/classifier.hpp"
#include "lada/dataset.hpp"
#include "lada/neighbors.hpp"
#include "lada/rng.hpp"

namespace lada {

enum class Provenance : std::uint8_t { Queried, Pseudo };

struct AnchorEntry {
  Id id = 0;
  int label = 0;
  Provenance provenance = Provenance::Queried;

  bool operator==(const AnchorEntry&) const = default;
};

/// Off trains on queried data only; RAA harvests confident samples from the
/// whole target set, LAA from the K nearest target neighbors of each anchor.
enum class PaaMode { Off, Raa, Laa };

std::string_view paa_mode_name(PaaMode m) noexcept;
PaaMode parse_paa_mode(std::string_view name);

struct PAAConfig {
  PaaMode mode = PaaMode::Laa;
  double confidence_threshold = 0.9;  // tau
  std::size_t k = 10;
  double noise_scale = 0.5;  // s: Gaussian noise std in units of the coordinate std
  double dropout = 0.1;      // rho: per-coordinate zeroing probability
  bool class_balance = true;

  void validate() const;
};

/// The anchor set A plus the pending supplement S. Class counts cover A only.
class AnchorSet {
 public:
  explicit AnchorSet(int num_classes = 0) : counts_(static_cast<std::size_t>(num_classes), 0) {}

  int num_classes() const noexcept { return static_cast<int>(counts_.size()); }
  const std::vector<AnchorEntry>& entries() const noexcept { return entries_; }
  const std::vector<AnchorEntry>& supplement() const noexcept { return supplement_; }
  std::span<const std::size_t> class_counts() const noexcept { return counts_; }
  std::vector<Id> entry_ids() const;

  /// Label of an entry of A; throws DataError otherwise.
  int label_of(Id id) const;
  /// True when `id` is in A or S.
  bool contains(Id id) const { return members_.count(id) != 0; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t queried_count() const noexcept;
  std::size_t pseudo_count() const noexcept { return entries_.size() - queried_count(); }

  /// Adds straight to A (initialization). Returns false for a duplicate.
  bool add_entry(const AnchorEntry& e);
  /// Adds to S. Returns false for a duplicate.
  bool add_supplement(const AnchorEntry& e);

  /// Share of class c among the entries of A; 0 for an empty set.
  double class_share(int c) const;
  double min_share() const;
  double max_share() const;

 private:
  friend AnchorSet merge_supplement(AnchorSet anchor);

  std::vector<AnchorEntry> entries_;
  std::vector<AnchorEntry> supplement_;
  std::vector<std::size_t> counts_;
  std::unordered_set<Id> members_;
  std::unordered_map<Id, std::size_t> entry_pos_;
};

/// A = queried entries (sorted by id), S empty.
AnchorSet init_anchor(std::span<const AnchorEntry> queried, int num_classes);
/// A = D_tl with the labels the oracle revealed.
AnchorSet init_anchor(const Dataset& data);

/// Rejection probability (p[c] - p_min) / p_max over the shares of A;
/// 0 for an empty anchor set.
double cbr_prob(const AnchorSet& anchor, int c);
std::vector<double> cbr_probs(const AnchorSet& anchor);

/// One harvesting pass over a mini-batch of anchors. For each anchor, in
/// order: draw a candidate (LAA: uniform over its K nearest target
/// neighbors in `target_index`; RAA: uniform over `target`), then
/// xi ~ U(0, 1). The candidate joins S with its argmax pseudo-label when its
/// confidence reaches tau, xi >= q[label] (q = 0 without class balancing),
/// and it is not already in A or S. Returns the number inserted.
std::size_t paa_step(AnchorSet& anchor, std::span<const Id> batch, const PAAConfig& cfg,
                     const Classifier& model, const NeighborIndex* target_index,
                     const FeatureTable& target, Rng& rng);

/// A <- A u S, S <- {}, class counts retallied.
AnchorSet merge_supplement(AnchorSet anchor);

/// Parameters of the mixed view x~ = beta x + (1 - beta) alpha(x).
struct AugmentParams {
  double noise_scale = 0.0;
  double dropout = 0.0;
  double beta_a = 0.2;
  double beta_b = 0.2;
  std::vector<double> coordinate_std;  // sigma_j; empty means all ones
};

/// Population standard deviation of every column.
std::vector<double> coordinate_std(const Matrix& x);

/// beta ~ Beta(a, b) first, then per coordinate j: alpha_j = x_j + N(0, s
/// sigma_j), zeroed with probability rho. Returns x + (1 - beta)(alpha - x),
/// which is exactly x wherever alpha_j == x_j.
std::vector<double> augment(std::span<const double> x, const AugmentParams& params, Rng& rng);

}  // namespace lada
