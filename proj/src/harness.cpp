#include "lada/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "lada/anchor.hpp"
#include "lada/csv.hpp"
#include "lada/embedding_io.hpp"
#include "lada/error.hpp"
#include "lada/neighbors.hpp"
#include "lada/rng.hpp"
#include "lada/sampler.hpp"
#include "lada/synth.hpp"

namespace lada {

namespace {

Batch labeled_batch(const FeatureTable& table, std::span<const Id> ids, const std::vector<int>& labels_by_row) {
  Batch b;
  b.x = table.gather(ids);
  b.y.reserve(ids.size());
  for (Id id : ids) b.y.push_back(labels_by_row[table.row_of(id)]);
  return b;
}

std::vector<int> evaluation_labels(const Dataset& data, std::span<const Id> ids) {
  auto truth = data.oracle.labels_for_evaluation(ids);
  std::vector<int> out(truth.size(), -1);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) out[i] = *truth[i];
  }
  return out;
}

AnchorRow anchor_row(const AnchorSet& a, int epoch, long pass) {
  AnchorRow r;
  r.epoch = epoch;
  r.pass = pass;
  r.size = a.size();
  r.queried = a.queried_count();
  r.pseudo = a.pseudo_count();
  r.min_share = a.min_share();
  r.max_share = a.max_share();
  r.class_counts.assign(a.class_counts().begin(), a.class_counts().end());
  return r;
}

}  // namespace

const MetricsRow& RunResult::final_metrics() const {
  if (metrics.empty()) throw ConfigError("run produced no epochs");
  return metrics.back();
}

double RunResult::final_anchor_share_ratio() const {
  const MetricsRow& m = final_metrics();
  if (m.anchor_size == 0 || m.anchor_min_share <= 0.0) return std::numeric_limits<double>::infinity();
  return m.anchor_max_share / m.anchor_min_share;
}

NeighborIndex embedding_index(const Classifier& model, const Matrix& x, std::span<const Id> ids, std::size_t k) {
  Matrix emb = model.embed(x);
  if (model.mode() == EmbeddingMode::Hidden) fill_zero_rows(emb);
  return build_index(emb, ids, k);
}

Dataset prepare_dataset(const RunConfig& cfg) {
  Dataset data;
  if (!cfg.data_path.empty()) {
    data = load_embeddings(cfg.data_path);
  } else {
    SynthConfig sc = cfg.synth;
    sc.seed = Rng::substream(cfg.seed, "data").next_u64();
    data = gen_synthetic(sc);
  }
  if (cfg.perturb_u > 0.0) {
    data = perturb_source(data, cfg.perturb_u, Rng::substream(cfg.seed, "perturb").next_u64());
  }
  return data;
}

RunResult run_experiment(const RunConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, prepare_dataset(cfg));
}

RunResult run_experiment(const RunConfig& cfg, Dataset data) {
  cfg.validate();
  const RunConfig eff = cfg.effective();
  data.validate();
  if (!data.target_labeled_ids.empty()) throw ConfigError("run: the dataset already has labeled target samples");
  if (data.source.empty() || data.target.empty()) throw DataError("run: both domains need samples");

  const std::size_t n_target = data.target.size();
  RoundPlan plan = plan_budget(n_target, eff.budget, eff.rounds, eff.dataset_kind, eff.query_epochs.front(),
                               eff.query_spacing);
  plan.query_epochs = eff.query_epochs;
  data.label_budget = plan.total;

  RunResult result;
  result.config = eff;

  Rng rng_init = Rng::substream(eff.seed, "init");
  Rng rng_shuffle = Rng::substream(eff.seed, "shuffle");
  Rng rng_select = Rng::substream(eff.seed, "select");
  Rng rng_paa = Rng::substream(eff.seed, "paa");
  Rng rng_augment = Rng::substream(eff.seed, "augment");

  Classifier model = eff.hidden_dim > 0 ? Classifier::hidden(data.dim(), eff.hidden_dim, data.num_classes())
                                        : Classifier::identity(data.dim(), data.num_classes());
  model.init_random(rng_init);
  SgdMomentum opt(eff.train);

  const FeatureTable source = FeatureTable::from(data.source);
  const std::vector<int> source_labels = label_vector(data.source);
  const FeatureTable target = FeatureTable::from(data.target);

  const std::size_t batch = eff.train.batch_size;
  const std::size_t iterations =
      eff.iterations_per_epoch ? eff.iterations_per_epoch : (n_target + batch - 1) / batch;

  AugmentParams aug_params;
  aug_params.noise_scale = eff.paa.noise_scale;
  aug_params.dropout = eff.paa.dropout;
  aug_params.beta_a = eff.train.mix_beta_a;
  aug_params.beta_b = eff.train.mix_beta_b;
  aug_params.coordinate_std = coordinate_std(target.x);
  const Augmenter augmenter = [&aug_params](std::span<const double> x, Rng& rng) {
    return augment(x, aug_params, rng);
  };

  const bool paa_on = eff.paa.mode != PaaMode::Off;
  const std::string criterion = std::string(criterion_name(eff.criterion));
  const std::string paa_mode = std::string(paa_mode_name(eff.paa.mode));

  PassSampler source_sampler;
  PassSampler target_sampler;
  std::optional<NeighborIndex> laa_index;
  int rounds_done = 0;
  const int total_epochs = eff.pretrain_epochs + eff.adapt_epochs;

  for (int epoch = 0; epoch < total_epochs; ++epoch) {
    if (rounds_done < eff.rounds && epoch == eff.query_epochs[static_cast<std::size_t>(rounds_done)]) {
      const std::vector<Id> unlabeled = data.unlabeled_target_ids();
      std::optional<NeighborIndex> index;
      if (needs_neighbor_index(eff.criterion)) {
        index = embedding_index(model, target.gather(unlabeled), unlabeled, eff.knn_k);
      }
      const std::vector<Id> picked =
          select(eff.criterion, model, data, index ? &*index : nullptr, plan, rounds_done, rng_select);
      data.reveal_labels(picked);
      for (Id id : picked) result.queries.push_back({rounds_done, id, criterion});
      ++rounds_done;
    }

    AnchorSet anchor = init_anchor(data);
    if (epoch < eff.pretrain_epochs) {
      for (std::size_t it = 0; it < iterations; ++it) {
        auto draw = source_sampler.next(source.ids, batch, rng_shuffle);
        step_eq3(model, opt, labeled_batch(source, draw.ids, source_labels), Batch{});
      }
    } else {
      std::vector<int> target_labels(target.size(), -1);
      for (Id id : data.target_labeled_ids) target_labels[target.row_of(id)] = *data.target_sample(id).label;

      if (paa_on && eff.paa.mode == PaaMode::Laa &&
          (!laa_index || model.mode() != EmbeddingMode::Identity)) {
        laa_index = embedding_index(model, target.x, target.ids, eff.paa.k);
      }
      target_sampler.reset();
      long pass = 0;
      for (std::size_t it = 0; it < iterations; ++it) {
        auto src_draw = source_sampler.next(source.ids, batch, rng_shuffle);
        const Batch src = labeled_batch(source, src_draw.ids, source_labels);
        if (anchor.size() == 0) {
          step_eq3(model, opt, src, Batch{});
          continue;
        }
        if (!paa_on) {
          const std::vector<Id> labeled(data.target_labeled_ids.begin(), data.target_labeled_ids.end());
          auto draw = target_sampler.next(labeled, batch, rng_shuffle);
          step_eq3(model, opt, src, labeled_batch(target, draw.ids, target_labels));
          continue;
        }
        auto draw = target_sampler.next(anchor.entry_ids(), batch, rng_shuffle);
        Batch anchors;
        anchors.x = target.gather(draw.ids);
        for (Id id : draw.ids) anchors.y.push_back(anchor.label_of(id));
        if (eff.ablation.mixup_aug) {
          step_eq5(model, opt, src, anchors, augmenter, rng_augment);
        } else {
          step_eq3(model, opt, src, anchors);
        }
        paa_step(anchor, draw.ids, eff.paa, model, laa_index ? &*laa_index : nullptr, target, rng_paa);
        if (draw.ends_pass) {
          anchor = merge_supplement(std::move(anchor));
          result.anchors.push_back(anchor_row(anchor, epoch, pass++));
        }
      }
      result.anchors.push_back(anchor_row(anchor, epoch, pass));
    }

    const std::vector<int> truth = evaluation_labels(data, target.ids);
    const Evaluation ev = evaluate(model, target.x, truth);
    MetricsRow row;
    row.seed = eff.seed;
    row.round = rounds_done;
    row.epoch = epoch;
    row.criterion = criterion;
    row.paa_mode = paa_mode;
    row.accuracy = ev.accuracy;
    row.per_class_accuracy = ev.per_class_average;
    row.n_queried = data.target_labeled_ids.size();
    row.anchor_size = anchor.size();
    row.anchor_pseudo = anchor.pseudo_count();
    row.anchor_min_share = anchor.min_share();
    row.anchor_max_share = anchor.max_share();
    result.metrics.push_back(std::move(row));
  }
  result.model = std::move(model);
  return result;
}

std::string metrics_csv(std::span<const MetricsRow> rows) {
  CsvWriter w({"seed", "round", "epoch", "criterion", "paa_mode", "accuracy", "per_class_accuracy", "n_queried",
               "anchor_size", "anchor_pseudo", "anchor_min_share", "anchor_max_share"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.seed), std::to_string(r.round), std::to_string(r.epoch), r.criterion, r.paa_mode,
           csv_number(r.accuracy), csv_number(r.per_class_accuracy), std::to_string(r.n_queried),
           std::to_string(r.anchor_size), std::to_string(r.anchor_pseudo), csv_number(r.anchor_min_share),
           csv_number(r.anchor_max_share)});
  }
  return w.str();
}

std::string anchors_csv(std::span<const AnchorRow> rows) {
  CsvWriter w({"epoch", "pass", "anchor_size", "queried", "pseudo", "class_min_share", "class_max_share"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.epoch), std::to_string(r.pass), std::to_string(r.size), std::to_string(r.queried),
           std::to_string(r.pseudo), csv_number(r.min_share), csv_number(r.max_share)});
  }
  return w.str();
}

std::string queries_csv(std::span<const QueryRow> rows) {
  CsvWriter w({"round", "id", "criterion"});
  for (const auto& r : rows) w.row({std::to_string(r.round), std::to_string(r.id), r.criterion});
  return w.str();
}

void write_run_outputs(const RunResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  detail::write_file(dir / "metrics.csv", metrics_csv(result.metrics));
  detail::write_file(dir / "anchors.csv", anchors_csv(result.anchors));
  detail::write_file(dir / "queries.csv", queries_csv(result.queries));
  detail::write_file(dir / "config.txt", dump_config(result.config));
}

std::vector<std::vector<RunResult>> run_grid(const RunConfig& base, std::span<const std::uint64_t> seeds,
                                             const std::vector<Variant>& variants) {
  std::vector<RunConfig> configs;
  for (const auto& v : variants) {
    for (std::uint64_t s : seeds) {
      RunConfig c = base;
      apply_options(c, v.overrides);
      c.seed = s;
      c.validate();
      configs.push_back(std::move(c));
    }
  }
  std::vector<RunResult> flat(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  const long jobs = static_cast<long>(configs.size());
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < jobs; ++j) {
    try {
      flat[static_cast<std::size_t>(j)] = run_experiment(configs[static_cast<std::size_t>(j)]);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<std::vector<RunResult>> out(variants.size());
  std::size_t j = 0;
  for (auto& per_variant : out) {
    for (std::size_t s = 0; s < seeds.size(); ++s) per_variant.push_back(std::move(flat[j++]));
  }
  return out;
}

const VariantSummary& SweepReport::variant(const std::string& name) const {
  for (const auto& v : variants) {
    if (v.name == name) return v;
  }
  throw ConfigError("sweep: no variant named '" + name + "'");
}

SweepReport summarize(const std::vector<std::pair<std::string, std::vector<double>>>& series,
                      const std::string& baseline, std::vector<std::uint64_t> seeds, std::size_t resamples) {
  const std::vector<double>* base = nullptr;
  for (const auto& [name, values] : series) {
    if (name == baseline) base = &values;
  }
  if (!base) throw ConfigError("sweep: baseline variant '" + baseline + "' is missing");
  SweepReport report;
  report.baseline = baseline;
  report.seeds = std::move(seeds);
  for (const auto& [name, values] : series) {
    if (values.size() != base->size()) {
      throw ConfigError("sweep: variant '" + name + "' has " + std::to_string(values.size()) +
                        " values, baseline has " + std::to_string(base->size()));
    }
    VariantSummary s;
    s.name = name;
    s.values = values;
    s.mean = mean(values);
    s.stddev = stddev(values);
    if (values.size() >= 2) s.vs_baseline = paired_bootstrap(values, *base, resamples);
    report.variants.push_back(std::move(s));
  }
  return report;
}

double final_metric(const RunResult& r, SweepMetric metric) {
  const MetricsRow& m = r.final_metrics();
  return metric == SweepMetric::Accuracy ? m.accuracy : m.per_class_accuracy;
}

SweepReport run_sweep(const RunConfig& base, std::span<const std::uint64_t> seeds,
                      const std::vector<Variant>& variants, const std::string& baseline, SweepMetric metric,
                      const std::filesystem::path& runs_dir) {
  if (seeds.size() < 2) throw ConfigError("sweep: at least 2 seeds are needed");
  if (!runs_dir.empty()) {
    for (const auto& v : variants) {
      if (v.name.empty() || v.name == "." || v.name == ".." || v.name.find_first_of("/\\") != std::string::npos) {
        throw ConfigError("sweep: variant name '" + v.name + "' cannot name a directory");
      }
    }
  }
  auto grid = run_grid(base, seeds, variants);
  if (!runs_dir.empty()) {
    for (std::size_t v = 0; v < variants.size(); ++v)
      for (std::size_t s = 0; s < seeds.size(); ++s)
        write_run_outputs(grid[v][s], runs_dir / variants[v].name / ("seed" + std::to_string(seeds[s])));
  }
  std::vector<std::pair<std::string, std::vector<double>>> series;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    std::vector<double> values;
    for (const auto& r : grid[v]) values.push_back(final_metric(r, metric));
    series.emplace_back(variants[v].name, std::move(values));
  }
  return summarize(series, baseline, std::vector<std::uint64_t>(seeds.begin(), seeds.end()));
}

std::string sweep_report_csv(const SweepReport& report) {
  CsvWriter w({"variant", "n", "mean", "std", "baseline", "mean_difference", "ci_lo", "ci_hi", "ci_excludes_zero"});
  for (const auto& v : report.variants) {
    std::vector<std::string> row{v.name, std::to_string(v.values.size()), csv_number(v.mean),
                                 csv_number(v.stddev), report.baseline};
    if (v.vs_baseline) {
      row.push_back(csv_number(v.vs_baseline->mean_difference));
      row.push_back(csv_number(v.vs_baseline->ci.lo));
      row.push_back(csv_number(v.vs_baseline->ci.hi));
      row.push_back(v.vs_baseline->ci.excludes_zero() ? "true" : "false");
    } else {
      row.insert(row.end(), {"", "", "", ""});
    }
    w.row(row);
  }
  return w.str();
}

PerturbationReport run_perturbation_sweep(const RunConfig& base, std::span<const double> u_values,
                                          std::span<const std::uint64_t> seeds) {
  if (u_values.empty() || seeds.empty()) throw ConfigError("perturb: need at least one u and one seed");
  const Criterion c = base.effective().criterion;
  if (c != Criterion::Las && c != Criterion::LasNoDiv) throw ConfigError("perturb: the base run must use LAS");
  for (std::size_t i = 0; i < u_values.size(); ++i) {
    if (!(u_values[i] >= 0.0)) throw ConfigError("perturb: u must be >= 0");
    if (i && u_values[i] <= u_values[i - 1]) throw ConfigError("perturb: u values must be increasing");
  }
  std::vector<Variant> variants;
  for (double u : u_values) {
    for (const char* mode : {"raa", "laa"}) {
      variants.push_back({std::string(mode) + "@" + csv_number(u),
                          {{"paa.mode", mode}, {"ablation.anchor_aug", "true"}, {"data.perturb_u", csv_number(u)}}});
    }
  }
  auto grid = run_grid(base, seeds, variants);

  PerturbationReport rep;
  rep.u_values.assign(u_values.begin(), u_values.end());
  rep.seeds.assign(seeds.begin(), seeds.end());
  for (std::size_t i = 0; i < u_values.size(); ++i) {
    std::vector<double> raa, laa;
    for (const auto& r : grid[2 * i]) raa.push_back(r.final_metrics().accuracy);
    for (const auto& r : grid[2 * i + 1]) laa.push_back(r.final_metrics().accuracy);
    rep.raa_mean.push_back(mean(raa));
    rep.laa_mean.push_back(mean(laa));
    rep.raa.push_back(std::move(raa));
    rep.laa.push_back(std::move(laa));
  }
  auto non_increasing = [](const std::vector<double>& m) {
    for (std::size_t i = 1; i < m.size(); ++i) {
      if (m[i] > m[i - 1]) return false;
    }
    return true;
  };
  rep.raa_non_increasing = non_increasing(rep.raa_mean);
  rep.laa_non_increasing = non_increasing(rep.laa_mean);
  if (seeds.size() >= 2) {
    rep.laa_minus_raa_at_max = paired_bootstrap(rep.laa.back(), rep.raa.back());
    rep.inconclusive = !(rep.laa_minus_raa_at_max->mean_difference >= 0.0 &&
                         rep.laa_minus_raa_at_max->ci.excludes_zero());
  }
  return rep;
}

std::string perturbation_runs_csv(const PerturbationReport& rep) {
  CsvWriter w({"u", "paa_mode", "seed", "accuracy"});
  for (std::size_t i = 0; i < rep.u_values.size(); ++i) {
    for (const auto& [mode, acc] : {std::pair{"raa", &rep.raa[i]}, std::pair{"laa", &rep.laa[i]}}) {
      for (std::size_t s = 0; s < rep.seeds.size(); ++s) {
        w.row({csv_number(rep.u_values[i]), mode, std::to_string(rep.seeds[s]), csv_number((*acc)[s])});
      }
    }
  }
  return w.str();
}

std::string perturbation_summary_csv(const PerturbationReport& rep) {
  CsvWriter w({"u", "paa_mode", "mean", "std", "non_increasing", "laa_minus_raa", "ci_lo", "ci_hi", "inconclusive"});
  for (std::size_t i = 0; i < rep.u_values.size(); ++i) {
    const bool last = i + 1 == rep.u_values.size();
    for (int m = 0; m < 2; ++m) {
      const auto& acc = m == 0 ? rep.raa[i] : rep.laa[i];
      std::vector<std::string> row{csv_number(rep.u_values[i]), m == 0 ? "raa" : "laa", csv_number(mean(acc)),
                                   csv_number(stddev(acc)),
                                   (m == 0 ? rep.raa_non_increasing : rep.laa_non_increasing) ? "true" : "false"};
      if (last && rep.laa_minus_raa_at_max) {
        row.push_back(csv_number(rep.laa_minus_raa_at_max->mean_difference));
        row.push_back(csv_number(rep.laa_minus_raa_at_max->ci.lo));
        row.push_back(csv_number(rep.laa_minus_raa_at_max->ci.hi));
        row.push_back(rep.inconclusive ? "true" : "false");
      } else {
        row.insert(row.end(), {"", "", "", ""});
      }
      w.row(row);
    }
  }
  return w.str();
}

std::string aggregate_metrics(std::span<const std::filesystem::path> metrics_files) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& path : metrics_files) {
    const auto rows = parse_csv(detail::read_file(path));
    if (rows.empty()) throw DataError(path.string() + ": empty metrics file");
    const auto& header = rows.front();
    auto col = [&](const char* name) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw DataError(path.string() + ": missing column " + name);
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_seed = col("seed"), c_epoch = col("epoch"), c_crit = col("criterion"),
                      c_paa = col("paa_mode"), c_acc = col("accuracy"), c_pc = col("per_class_accuracy");
    auto number = [&](const std::string& text, std::size_t row) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || end != text.data() + text.size()) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ": not a number: " + text);
      }
      return v;
    };
    // last epoch per (seed, criterion, paa_mode)
    std::map<std::string, std::pair<double, std::size_t>> last;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() != header.size()) throw DataError(path.string() + ": row " + std::to_string(i) + " has wrong width");
      const std::string key = r[c_crit] + "/" + r[c_paa] + "#" + r[c_seed];
      const double epoch = number(r[c_epoch], i);
      auto it = last.find(key);
      if (it == last.end() || epoch > it->second.first) last[key] = {epoch, i};
    }
    for (const auto& [key, entry] : last) {
      const auto& r = rows[entry.second];
      auto& g = groups[r[c_crit] + "/" + r[c_paa]];
      g.first.push_back(number(r[c_acc], entry.second));
      g.second.push_back(number(r[c_pc], entry.second));
    }
  }
  CsvWriter w({"group", "n", "mean_accuracy", "std_accuracy", "mean_per_class", "std_per_class"});
  for (const auto& [name, g] : groups) {
    w.row({name, std::to_string(g.first.size()), csv_number(mean(g.first)), csv_number(stddev(g.first)),
           csv_number(mean(g.second)), csv_number(stddev(g.second))});
  }
  return w.str();
}

}  // namespace lada
