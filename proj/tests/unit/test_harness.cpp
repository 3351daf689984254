#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "lada/csv.hpp"
#include "lada/error.hpp"
#include "lada/harness.hpp"

using namespace lada;

namespace {

RunConfig tiny(std::uint64_t seed = 1) {
  RunConfig cfg;
  cfg.synth.num_classes = 3;
  cfg.synth.dim = 4;
  cfg.synth.samples_per_class = 30;
  cfg.synth.rotation = 0.4;
  cfg.pretrain_epochs = 2;
  cfg.adapt_epochs = 4;
  cfg.rounds = 2;
  cfg.budget = 0.1;
  cfg.query_spacing = 1;
  cfg.knn_k = 5;
  cfg.paa.k = 5;
  cfg.train.learning_rate = 0.05;
  cfg.seed = seed;
  return cfg;
}

std::vector<std::string> header_of(const std::string& csv) { return parse_csv(csv).front(); }

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("a run is a pure function of its config") {
    for (auto mutate : {+[](RunConfig&) {}, +[](RunConfig& c) { c.hidden_dim = 6; },
                        +[](RunConfig& c) { c.paa.mode = PaaMode::Raa; }}) {
      RunConfig cfg = tiny(7);
      mutate(cfg);
      const auto a = run_experiment(cfg);
      const auto b = run_experiment(cfg);
      CHECK(metrics_csv(a.metrics) == metrics_csv(b.metrics));
      CHECK(queries_csv(a.queries) == queries_csv(b.queries));
      CHECK(anchors_csv(a.anchors) == anchors_csv(b.anchors));
    }
    const auto c = run_experiment(tiny(8));
    CHECK(queries_csv(c.queries) != queries_csv(run_experiment(tiny(7)).queries));
  }

  TEST_CASE("budget accounting") {
    for (Criterion crit : {Criterion::Las, Criterion::Random, Criterion::Badge, Criterion::Nau}) {
      RunConfig cfg = tiny(2);
      cfg.criterion = crit;
      const auto r = run_experiment(cfg);
      const std::size_t n_target = 90;
      CHECK(r.queries.size() == static_cast<std::size_t>(0.1 * n_target));
      std::set<Id> ids;
      for (const auto& q : r.queries) CHECK(ids.insert(q.id).second);
      std::set<int> rounds;
      for (const auto& q : r.queries) rounds.insert(q.round);
      CHECK(rounds == std::set<int>{0, 1});
      CHECK(r.final_metrics().n_queried == r.queries.size());
      CHECK(r.metrics.size() == 6);
      for (std::size_t i = 1; i < r.metrics.size(); ++i) CHECK(r.metrics[i].n_queried >= r.metrics[i - 1].n_queried);
    }
  }

  TEST_CASE("anchor rows") {
    const auto r = run_experiment(tiny(3));
    REQUIRE_FALSE(r.anchors.empty());
    for (const auto& a : r.anchors) {
      CHECK(a.epoch >= 2);
      CHECK(a.size == a.queried + a.pseudo);
      CHECK(a.min_share <= a.max_share);
    }
    CHECK(header_of(anchors_csv(r.anchors)) ==
          std::vector<std::string>{"epoch", "pass", "anchor_size", "queried", "pseudo", "class_min_share", "class_max_share"});
  }

  TEST_CASE("PAA off never adds pseudo labels") {
    RunConfig cfg = tiny(4);
    cfg.paa.mode = PaaMode::Off;
    const auto r = run_experiment(cfg);
    for (const auto& m : r.metrics) CHECK(m.anchor_pseudo == 0);
    for (const auto& a : r.anchors) CHECK(a.pseudo == 0);
  }

  TEST_CASE("all ablation switches off") {
    RunConfig cfg = tiny(5);
    cfg.ablation = {false, false, false, false};
    const auto r = run_experiment(cfg);
    CHECK(r.final_metrics().criterion == "LAS-noDiv");
    CHECK(r.final_metrics().paa_mode == "off");
    CHECK(r.config.paa.mode == PaaMode::Off);
  }

  TEST_CASE("full budget labels the whole target domain") {
    RunConfig cfg = tiny(6);
    cfg.budget = 1.0;
    cfg.rounds = 1;
    cfg.adapt_epochs = 10;
    const auto full = run_experiment(cfg);
    CHECK(full.queries.size() == 90);
    CHECK(full.final_metrics().n_queried == 90);
    CHECK(full.final_metrics().accuracy >= 0.8);
  }

  TEST_CASE("accuracy and per-class accuracy are fractions") {
    const auto r = run_experiment(tiny(9));
    for (const auto& m : r.metrics) {
      CHECK(m.accuracy >= 0.0);
      CHECK(m.accuracy <= 1.0);
      CHECK(m.per_class_accuracy >= 0.0);
      CHECK(m.per_class_accuracy <= 1.0);
    }
  }

  TEST_CASE("run outputs on disk") {
    const auto dir = std::filesystem::temp_directory_path() / "lada_harness_outputs";
    std::filesystem::remove_all(dir);
    const auto r = run_experiment(tiny(10));
    write_run_outputs(r, dir);
    for (const char* f : {"metrics.csv", "anchors.csv", "queries.csv", "config.txt"}) CHECK(std::filesystem::exists(dir / f));
    CHECK(read_text(dir / "metrics.csv") == metrics_csv(r.metrics));
    CHECK(dump_config(load_config(dir / "config.txt")) == dump_config(r.config));

    const std::vector<std::filesystem::path> files{dir / "metrics.csv"};
    const auto agg = parse_csv(aggregate_metrics(files));
    REQUIRE(agg.size() == 2);
    CHECK(agg[0] == std::vector<std::string>{"group", "n", "mean_accuracy", "std_accuracy", "mean_per_class", "std_per_class"});
    CHECK(agg[1][0] == "LAS/laa");
    CHECK(agg[1][1] == "1");
    CHECK(std::stod(agg[1][2]) == r.final_metrics().accuracy);

    write_text(dir / "bad.csv", "seed,epoch,criterion,paa_mode,accuracy,per_class_accuracy\n0,x,LAS,laa,0.5,0.5\n");
    const std::vector<std::filesystem::path> bad{dir / "bad.csv"};
    CHECK_THROWS_AS(aggregate_metrics(bad), DataError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("summaries") {
    const std::vector<double> a{0.5, 0.6, 0.7}, b{0.4, 0.6, 0.65};
    const auto rep = summarize({{"base", a}, {"other", b}}, "base", {1, 2, 3}, 2000);
    CHECK(rep.variant("base").vs_baseline->mean_difference == 0.0);
    CHECK(rep.variant("other").vs_baseline->mean_difference == doctest::Approx(-0.05));
    CHECK(rep.variant("other").mean == doctest::Approx(0.55));
    CHECK_THROWS_AS(summarize({{"base", a}, {"short", {0.1}}}, "base"), ConfigError);
    CHECK_THROWS_AS(summarize({{"base", a}}, "missing"), ConfigError);
    CHECK(header_of(sweep_report_csv(rep)) ==
          std::vector<std::string>{"variant", "n", "mean", "std", "baseline", "mean_difference", "ci_lo", "ci_hi", "ci_excludes_zero"});
  }

  TEST_CASE("sweep runs every variant for every seed") {
    const std::vector<std::uint64_t> seeds{1, 2};
    const std::vector<Variant> variants{{"las", {}}, {"random", {{"selection.criterion", "random"}}}};
    const auto rep = run_sweep(tiny(), seeds, variants, "las");
    CHECK(rep.variants.size() == 2);
    CHECK(rep.variant("las").values.size() == 2);
    CHECK(rep.variant("las").vs_baseline->mean_difference == 0.0);
    RunConfig one = tiny();
    one.seed = 2;
    CHECK(rep.variant("las").values[1] == run_experiment(one).final_metrics().accuracy);
    const std::vector<std::uint64_t> single{1};
    CHECK_THROWS_AS(run_sweep(tiny(), single, variants, "las"), ConfigError);
  }

  TEST_CASE("perturbation sweep covers the grid") {
    const std::vector<double> us{0.0, 0.3};
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto rep = run_perturbation_sweep(tiny(), us, seeds);
    CHECK(rep.raa.size() == 2);
    CHECK(rep.laa[1].size() == 2);
    CHECK(parse_csv(perturbation_runs_csv(rep)).size() == 1 + 2 * 2 * 2);
    CHECK(parse_csv(perturbation_summary_csv(rep)).size() == 1 + 2 * 2);
    REQUIRE(rep.laa_minus_raa_at_max.has_value());

    RunConfig plain = tiny();
    plain.seed = 2;
    plain.paa.mode = PaaMode::Laa;
    CHECK(rep.laa[0][1] == run_experiment(plain).final_metrics().accuracy);

    RunConfig entropy = tiny();
    entropy.criterion = Criterion::Entropy;
    CHECK_THROWS_AS(run_perturbation_sweep(entropy, us, seeds), ConfigError);
    const std::vector<double> down{0.3, 0.0};
    CHECK_THROWS_AS(run_perturbation_sweep(tiny(), down, seeds), ConfigError);
  }

  TEST_CASE("a prepared dataset gives the same run") {
    const RunConfig cfg = tiny(11);
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg, prepare_dataset(cfg));
    CHECK(metrics_csv(a.metrics) == metrics_csv(b.metrics));
  }
}

TEST_CASE("sweep can keep every run's outputs" * doctest::test_suite("harness")) {
  const auto dir = std::filesystem::temp_directory_path() / "lada_sweep_runs";
  std::filesystem::remove_all(dir);
  const std::vector<std::uint64_t> seeds{1, 2};
  const std::vector<Variant> variants{{"las", {}}, {"off", {{"paa.mode", "off"}}}};
  const auto rep = run_sweep(tiny(), seeds, variants, "las", SweepMetric::Accuracy, dir);
  for (const char* v : {"las", "off"})
    for (const char* s : {"seed1", "seed2"}) CHECK(std::filesystem::exists(dir / v / s / "metrics.csv"));
  const std::vector<std::filesystem::path> files{dir / "off" / "seed1" / "metrics.csv", dir / "off" / "seed2" / "metrics.csv"};
  const auto agg = parse_csv(aggregate_metrics(files));
  REQUIRE(agg.size() == 2);
  CHECK(agg[1][0] == "LAS/off");
  CHECK(std::stod(agg[1][2]) == doctest::Approx(rep.variant("off").mean).epsilon(1e-12));
  const std::vector<Variant> bad{{"a/b", {}}};
  CHECK_THROWS_AS(run_sweep(tiny(), seeds, bad, "a/b", SweepMetric::Accuracy, dir), ConfigError);
  std::filesystem::remove_all(dir);
}
