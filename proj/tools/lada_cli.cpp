#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lada/classifier.hpp"
#include "lada/config.hpp"
#include "lada/csv.hpp"
#include "lada/embedding_io.hpp"
#include "lada/error.hpp"
#include "lada/harness.hpp"
#include "lada/neighbors.hpp"
#include "lada/rng.hpp"
#include "lada/selection.hpp"

namespace fs = std::filesystem;
using namespace lada;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string criterion;
  std::string paa;
  std::optional<double> budget;
  std::optional<int> rounds;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--criterion", f.criterion, "selection criterion");
  cmd->add_option("--paa", f.paa, "anchor augmentation: off, raa or laa");
  cmd->add_option("--budget", f.budget, "labeling budget fraction B");
  cmd->add_option("--rounds", f.rounds, "query rounds R");
  cmd->add_option("--set", f.sets, "extra key=value override (repeatable)");
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + s + "'");
  auto trim = [](std::string v) {
    while (!v.empty() && v.front() == ' ') v.erase(v.begin());
    while (!v.empty() && v.back() == ' ') v.pop_back();
    return v;
  };
  return {trim(s.substr(0, eq)), trim(s.substr(eq + 1))};
}

RunConfig build_config(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.criterion.empty()) set_option(cfg, "selection.criterion", f.criterion);
  if (!f.paa.empty()) set_option(cfg, "paa.mode", f.paa);
  if (f.budget) cfg.budget = *f.budget;
  if (f.rounds) cfg.rounds = *f.rounds;
  for (const auto& s : f.sets) {
    auto [k, v] = split_assignment(s);
    set_option(cfg, k, v);
  }
  cfg.validate();
  return cfg;
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  std::string item;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto comma = spec.find(',', start);
    item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    start = comma == std::string::npos ? spec.size() + 1 : comma + 1;
    if (item.empty()) continue;
    try {
      auto dash = item.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw ConfigError("bad seed range '" + item + "'");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed list '" + spec + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty seed list");
  return out;
}

std::vector<double> parse_doubles(const std::string& spec) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto comma = spec.find(',', start);
    auto item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    start = comma == std::string::npos ? spec.size() + 1 : comma + 1;
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw ConfigError("bad number list '" + spec + "'");
    }
  }
  return out;
}

// "name:key=value;key=value"
Variant parse_variant(const std::string& spec) {
  Variant v;
  auto colon = spec.find(':');
  v.name = spec.substr(0, colon);
  if (v.name.empty()) throw ConfigError("variant needs a name: '" + spec + "'");
  if (colon == std::string::npos) return v;
  std::string rest = spec.substr(colon + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    auto semi = rest.find(';', start);
    auto item = rest.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
    start = semi == std::string::npos ? rest.size() + 1 : semi + 1;
    if (!item.empty()) v.overrides.push_back(split_assignment(item));
  }
  return v;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  write_text(path, text);
}

// Reveals the ids listed in the `id` column of a queries.csv-style file.
void reveal_prior(Dataset& data, const std::string& path) {
  if (path.empty()) return;
  auto rows = parse_csv(read_text(path));
  if (rows.empty()) throw DataError(path + ": empty file");
  std::size_t col = rows[0].size();
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    if (rows[0][i] == "id") col = i;
  }
  if (col == rows[0].size()) throw DataError(path + ": no id column");
  std::vector<Id> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    try {
      ids.push_back(std::stoull(rows[r].at(col)));
    } catch (const std::exception&) {
      throw DataError(path + ": bad id on row " + std::to_string(r + 1));
    }
  }
  data.reveal_labels(ids);
}

struct ModelInputs {
  std::string data;
  std::string model;
  std::string criterion = "LAS";
  std::size_t k = 10;
  double budget = 0.05;
  int rounds = 5;
  int round = 0;
  std::string labeled;
  std::uint64_t seed = 0;
  std::string out;
};

void add_model_inputs(CLI::App* cmd, ModelInputs& m) {
  cmd->add_option("--data", m.data, "embeddings file (binary or .csv)")->required();
  cmd->add_option("--model", m.model, "model checkpoint")->required();
  cmd->add_option("--criterion", m.criterion, "criterion name");
  cmd->add_option("--k", m.k, "neighborhood size");
  cmd->add_option("--budget", m.budget, "labeling budget fraction B");
  cmd->add_option("--rounds", m.rounds, "query rounds R");
  cmd->add_option("--round", m.round, "0-based round number");
  cmd->add_option("--labeled", m.labeled, "CSV with an id column of already-labeled target samples");
  cmd->add_option("--seed", m.seed, "seed of the selection stream");
  cmd->add_option("--out", m.out, "output CSV (default stdout)");
}

struct Loaded {
  Dataset data;
  Classifier model;
  Criterion criterion;
  RoundPlan plan;
  std::optional<NeighborIndex> index;
};

Loaded load_inputs(const ModelInputs& m) {
  Loaded l;
  l.criterion = parse_criterion(m.criterion);
  l.data = load_embeddings(m.data);
  l.model = load_checkpoint(m.model);
  if (l.model.input_dim() != l.data.dim() || l.model.num_classes() != l.data.num_classes()) {
    throw DataError("checkpoint shape does not match the embeddings file");
  }
  l.plan = plan_budget(l.data.target.size(), m.budget, m.rounds);
  reveal_prior(l.data, m.labeled);
  if (needs_neighbor_index(l.criterion)) {
    const auto unlabeled = l.data.unlabeled_target_ids();
    const auto table = FeatureTable::from(l.data.target);
    l.index = lada::embedding_index(l.model, table.gather(unlabeled), unlabeled, m.k);
  }
  return l;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active domain adaptation simulator"};
  app.require_subcommand(1);

  CommonFlags gen_flags, run_flags, sweep_flags, perturb_flags;
  std::string gen_file;
  auto* gen = app.add_subcommand("gen-data", "write a synthetic two-domain embeddings file");
  add_common(gen, gen_flags);
  gen->add_option("--file", gen_file, "output embeddings path (.csv for CSV)")->required();

  ModelInputs score_in, select_in;
  auto* score = app.add_subcommand("score", "score the unlabeled target pool");
  add_model_inputs(score, score_in);
  auto* sel = app.add_subcommand("select", "pick one round of queries");
  add_model_inputs(sel, select_in);

  auto* run = app.add_subcommand("run", "one full experiment");
  add_common(run, run_flags);

  std::string sweep_seeds = "0-19";
  std::vector<std::string> sweep_variants;
  std::string sweep_baseline;
  bool per_class = false;
  auto* sweep = app.add_subcommand("sweep", "several variants over many seeds");
  add_common(sweep, sweep_flags);
  sweep->add_option("--seeds", sweep_seeds, "seed list, e.g. 0-19 or 1,4,9");
  sweep->add_option("--variant", sweep_variants, "name:key=value;key=value (repeatable)")->required();
  sweep->add_option("--baseline", sweep_baseline, "baseline variant name (default: first)");
  sweep->add_flag("--per-class", per_class, "compare per-class average accuracy");

  std::string perturb_seeds = "0-9";
  std::string perturb_u = "0,0.5,1";
  auto* perturb = app.add_subcommand("perturb", "RAA vs LAA under growing source displacement");
  add_common(perturb, perturb_flags);
  perturb->add_option("--seeds", perturb_seeds, "seed list");
  perturb->add_option("--u", perturb_u, "comma-separated increasing displacement scales");

  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "aggregate final-epoch metrics");
  report->add_option("metrics", report_inputs, "metrics.csv files or run directories")->required();
  report->add_option("--out", report_out, "output directory (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      const RunConfig cfg = build_config(gen_flags);
      write_embeddings(prepare_dataset(cfg), gen_file);
    } else if (*score) {
      Loaded l = load_inputs(score_in);
      Rng rng = Rng::substream(score_in.seed, "select");
      const auto sv = score_criterion(l.criterion, l.model, l.data, l.index ? &*l.index : nullptr,
                                      l.plan.round_size(score_in.round), rng);
      CsvWriter w({"id", "criterion", "score"});
      for (std::size_t i = 0; i < sv.size(); ++i) {
        w.row({std::to_string(sv.ids[i]), std::string(criterion_name(l.criterion)), csv_number(sv.scores[i])});
      }
      emit(w.str(), score_in.out);
    } else if (*sel) {
      Loaded l = load_inputs(select_in);
      Rng rng = Rng::substream(select_in.seed, "select");
      const auto ids =
          select(l.criterion, l.model, l.data, l.index ? &*l.index : nullptr, l.plan, select_in.round, rng);
      std::vector<QueryRow> rows;
      for (Id id : ids) rows.push_back({select_in.round, id, std::string(criterion_name(l.criterion))});
      emit(queries_csv(rows), select_in.out);
    } else if (*run) {
      const RunConfig cfg = build_config(run_flags);
      const RunResult result = run_experiment(cfg);
      write_run_outputs(result, cfg.out_dir);
      save_checkpoint(result.model, fs::path(cfg.out_dir) / "model.bin");
      const auto& m = result.final_metrics();
      std::cout << m.criterion << " paa=" << m.paa_mode << " accuracy=" << csv_number(m.accuracy)
                << " per_class=" << csv_number(m.per_class_accuracy) << " queried=" << m.n_queried << '\n';
    } else if (*sweep) {
      const RunConfig cfg = build_config(sweep_flags);
      std::vector<Variant> variants;
      for (const auto& s : sweep_variants) variants.push_back(parse_variant(s));
      const std::string baseline = sweep_baseline.empty() ? variants.front().name : sweep_baseline;
      const auto rep = run_sweep(cfg, parse_seeds(sweep_seeds), variants, baseline,
                                 per_class ? SweepMetric::PerClassAccuracy : SweepMetric::Accuracy, cfg.out_dir);
      fs::create_directories(cfg.out_dir);
      const std::string text = sweep_report_csv(rep);
      write_text(fs::path(cfg.out_dir) / "report.csv", text);
      std::cout << text;
    } else if (*perturb) {
      const RunConfig cfg = build_config(perturb_flags);
      const auto u = parse_doubles(perturb_u);
      const auto seeds = parse_seeds(perturb_seeds);
      const auto rep = run_perturbation_sweep(cfg, u, seeds);
      fs::create_directories(cfg.out_dir);
      write_text(fs::path(cfg.out_dir) / "report.csv", perturbation_runs_csv(rep));
      const std::string summary = perturbation_summary_csv(rep);
      write_text(fs::path(cfg.out_dir) / "perturb_summary.csv", summary);
      std::cout << summary;
    } else if (*report) {
      std::vector<fs::path> files;
      for (const auto& p : report_inputs) {
        fs::path path(p);
        if (!fs::is_directory(path)) {
          files.push_back(path);
          continue;
        }
        std::vector<fs::path> found;
        for (const auto& e : fs::recursive_directory_iterator(path)) {
          if (e.is_regular_file() && e.path().filename() == "metrics.csv") found.push_back(e.path());
        }
        if (found.empty()) throw DataError(p + ": no metrics.csv found");
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
      }
      const std::string text = aggregate_metrics(files);
      if (report_out.empty()) {
        std::cout << text;
      } else {
        fs::create_directories(report_out);
        write_text(fs::path(report_out) / "report.csv", text);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
