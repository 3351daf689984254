#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lada/anchor.hpp"
#include "lada/classifier.hpp"
#include "lada/selection.hpp"
#include "lada/synth.hpp"

namespace lada {

/// Component switches of the ablation table. Turning anchor augmentation
/// off also turns mixup off and trains on queried data only.
struct Ablation {
  bool div_sel = true;
  bool anchor_aug = true;
  bool mixup_aug = true;
  bool cbr = true;
};

struct RunConfig {
  SynthConfig synth;            // used when data_path is empty; seed comes from `seed`
  std::string data_path;        // embeddings file (binary or .csv)
  double perturb_u = 0.0;       // source prototype displacement, 0 = off
  DatasetKind dataset_kind = DatasetKind::Standard;

  Criterion criterion = Criterion::Las;
  double budget = 0.05;
  int rounds = 5;
  std::vector<int> query_epochs;  // empty: pretrain_epochs + query_spacing * r
  int query_spacing = 2;
  std::size_t knn_k = 10;

  int pretrain_epochs = 10;
  int adapt_epochs = 30;
  std::size_t iterations_per_epoch = 0;  // 0: ceil(n_target / batch_size)
  int hidden_dim = 0;                    // 0: identity embedding

  TrainConfig train;
  PAAConfig paa;
  Ablation ablation;

  std::uint64_t seed = 0;
  std::string out_dir = "out";

  /// Throws ConfigError on any invalid field.
  void validate() const;
  /// Copy with the ablation switches folded into the mode fields:
  /// PAA off <=> no anchor augmentation (and then no mixup), CBR drives
  /// class balancing, LAS without Div-Sel becomes LAS-noDiv.
  RunConfig effective() const;
};

/// Sets one dotted key ("train.learning_rate", "paa.mode", ...).
/// Unknown keys and unparsable values raise ConfigError.
void set_option(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses the `key = value` document with `[section]` headers; keys inside a
/// section are prefixed with "section.". `#` and `;` start comments.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);
void apply_options(RunConfig& cfg, const std::vector<std::pair<std::string, std::string>>& kv);

/// The full configuration as a key-value document that load_config reads back.
std::string dump_config(const RunConfig& cfg);

}  // namespace lada
