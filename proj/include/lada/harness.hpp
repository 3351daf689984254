#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lada/config.hpp"
#include "lada/dataset.hpp"
#include "lada/neighbors.hpp"
#include "lada/stats.hpp"

namespace lada {

struct MetricsRow {
  std::uint64_t seed = 0;
  int round = 0;  // query rounds completed by the end of the epoch
  int epoch = 0;
  std::string criterion;
  std::string paa_mode;
  double accuracy = 0.0;
  double per_class_accuracy = 0.0;
  std::size_t n_queried = 0;
  std::size_t anchor_size = 0;
  std::size_t anchor_pseudo = 0;
  double anchor_min_share = 0.0;
  double anchor_max_share = 0.0;
};

/// Anchor-set state after each merge (end of pass `pass` over A) and once
/// more at the end of every adaptation epoch, where `pass` is the index of
/// the unfinished pass.
struct AnchorRow {
  int epoch = 0;
  long pass = 0;
  std::size_t size = 0;
  std::size_t queried = 0;
  std::size_t pseudo = 0;
  double min_share = 0.0;
  double max_share = 0.0;
  std::vector<std::size_t> class_counts;
};

struct QueryRow {
  int round = 0;
  Id id = 0;
  std::string criterion;
};

struct RunResult {
  RunConfig config;  // effective configuration
  std::vector<MetricsRow> metrics;
  std::vector<AnchorRow> anchors;
  std::vector<QueryRow> queries;
  Classifier model;

  const MetricsRow& final_metrics() const;
  /// max / min class share of the anchor set at the end of the last epoch;
  /// +inf when a class is missing.
  double final_anchor_share_ratio() const;
};

/// Builds the run's dataset: loads `data_path` or generates the synthetic
/// domains from the "data" stream, then displaces source prototypes by
/// `perturb_u` from the "perturb" stream.
Dataset prepare_dataset(const RunConfig& cfg);

/// Neighbor index over the model's embeddings of `x`. In hidden mode,
/// all-zero activations are mapped to the uniform direction first.
NeighborIndex embedding_index(const Classifier& model, const Matrix& x, std::span<const Id> ids, std::size_t k);

/// The full loop: source-only pretraining, then adaptation epochs with
/// query rounds at the scheduled epochs. The config is validated before
/// any compute.
RunResult run_experiment(const RunConfig& cfg);
/// Same, on a prepared dataset (its labeled set must be empty).
RunResult run_experiment(const RunConfig& cfg, Dataset data);

/// Writes metrics.csv, anchors.csv, queries.csv and config.txt into `dir`.
void write_run_outputs(const RunResult& result, const std::filesystem::path& dir);

std::string metrics_csv(std::span<const MetricsRow> rows);
std::string anchors_csv(std::span<const AnchorRow> rows);
std::string queries_csv(std::span<const QueryRow> rows);

struct Variant {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;  // config keys
};

enum class SweepMetric { Accuracy, PerClassAccuracy };

/// Runs every variant for every seed (runs are independent and spread over
/// threads). results[v][s] is variant v with seeds[s]. The first failure is
/// rethrown after all runs finish.
std::vector<std::vector<RunResult>> run_grid(const RunConfig& base, std::span<const std::uint64_t> seeds,
                                             const std::vector<Variant>& variants);

struct VariantSummary {
  std::string name;
  std::vector<double> values;  // one per seed
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<PairedComparison> vs_baseline;  // absent for fewer than 2 seeds
};

struct SweepReport {
  std::string baseline;
  std::vector<std::uint64_t> seeds;
  std::vector<VariantSummary> variants;

  const VariantSummary& variant(const std::string& name) const;
};

/// Mean, std and paired bootstrap CI of (variant - baseline) for each named
/// series. All series must have the same length (ConfigError otherwise).
SweepReport summarize(const std::vector<std::pair<std::string, std::vector<double>>>& series,
                      const std::string& baseline, std::vector<std::uint64_t> seeds = {},
                      std::size_t resamples = 10000);

double final_metric(const RunResult& r, SweepMetric metric);

/// A non-empty `runs_dir` also receives every run's outputs under
/// `<variant>/seed<N>/`.
SweepReport run_sweep(const RunConfig& base, std::span<const std::uint64_t> seeds,
                      const std::vector<Variant>& variants, const std::string& baseline,
                      SweepMetric metric = SweepMetric::Accuracy, const std::filesystem::path& runs_dir = {});

std::string sweep_report_csv(const SweepReport& report);

struct PerturbationReport {
  std::vector<double> u_values;
  std::vector<std::uint64_t> seeds;
  // accuracy[u][seed] per mode
  std::vector<std::vector<double>> raa;
  std::vector<std::vector<double>> laa;
  std::vector<double> raa_mean;
  std::vector<double> laa_mean;
  bool raa_non_increasing = false;
  bool laa_non_increasing = false;
  std::optional<PairedComparison> laa_minus_raa_at_max;
  /// True when the CI at the largest u does not exclude 0 or LAA trails RAA.
  bool inconclusive = true;
};

/// Crosses u_values x {RAA, LAA} x seeds on LAS selection.
PerturbationReport run_perturbation_sweep(const RunConfig& base, std::span<const double> u_values,
                                          std::span<const std::uint64_t> seeds);

/// Long format: u,paa_mode,seed,accuracy, one row per run.
std::string perturbation_runs_csv(const PerturbationReport& report);
/// u,paa_mode,mean,std plus trend flags.
std::string perturbation_summary_csv(const PerturbationReport& report);

/// Final-epoch rows of several metrics.csv files grouped by
/// (criterion, paa_mode): group,n,mean_accuracy,std_accuracy,mean_per_class,std_per_class.
std::string aggregate_metrics(std::span<const std::filesystem::path> metrics_files);

}  // namespace lada
