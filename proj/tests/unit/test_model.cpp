#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "helpers.hpp"
#include "lada/classifier.hpp"
#include "lada/error.hpp"

using namespace lada;
using testing::mat;

namespace {

Classifier random_model(Rng& rng, bool hidden) {
  const int d = 2 + static_cast<int>(rng.index(7));
  const int C = 2 + static_cast<int>(rng.index(3));
  Classifier m = hidden ? Classifier::hidden(d, 1 + static_cast<int>(rng.index(6)), C) : Classifier::identity(d, C);
  m.init_random(rng);
  auto theta = m.flat_parameters();
  for (double& t : theta) t += rng.normal(0.0, 0.3);
  m.set_flat_parameters(theta);
  return m;
}

Batch random_batch(Rng& rng, std::size_t n, int d, int C) {
  Batch b;
  b.x = testing::random_matrix(n, static_cast<std::size_t>(d), rng, 1.5);
  for (std::size_t i = 0; i < n; ++i) b.y.push_back(static_cast<int>(rng.index(static_cast<std::size_t>(C))));
  return b;
}

double objective_loss(const Classifier& m, const Batch& s, const Batch& t) { return objective(m, s, t).loss; }

// Central differences with the floor-1e-2 relative error.
double max_relative_error(const Classifier& model, const Batch& s, const Batch& t) {
  const auto analytic = objective(model, s, t).gradient;
  auto theta = model.flat_parameters();
  Classifier probe = model;
  const double eps = 1e-6;
  double worst = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + eps;
    probe.set_flat_parameters(theta);
    const double up = objective_loss(probe, s, t);
    theta[k] = saved - eps;
    probe.set_flat_parameters(theta);
    const double down = objective_loss(probe, s, t);
    theta[k] = saved;
    const double fd = (up - down) / (2.0 * eps);
    const double err = std::abs(analytic[k] - fd) / std::max({std::abs(analytic[k]), std::abs(fd), 1e-2});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("zero head gives uniform probabilities") {
    Classifier m = Classifier::identity(3, 4);
    const auto p = m.predict_proba(mat({{1.0, -2.0, 3.0}, {0.0, 0.0, 0.0}}));
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t c = 0; c < 4; ++c) CHECK(p(i, c) == doctest::Approx(0.25).epsilon(1e-15));
    }
  }

  TEST_CASE("identity head by hand") {
    Classifier m = Classifier::identity(2, 2);
    m.head_weights() = mat({{1.0, 0.0}, {0.0, 1.0}});
    const auto fwd = m.forward(mat({{3.0, 3.0}, {1.0, 0.0}}));
    CHECK(fwd.embedding == mat({{3.0, 3.0}, {1.0, 0.0}}));
    CHECK(fwd.probs(0, 0) == 0.5);
    CHECK(fwd.probs(0, 1) == 0.5);
    const double e = std::exp(1.0);
    CHECK(fwd.probs(1, 0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-14));
  }

  TEST_CASE("hidden layer applies ReLU") {
    Classifier m = Classifier::hidden(2, 2, 2);
    m.hidden_weights() = mat({{1.0, 0.0}, {0.0, -1.0}});
    m.hidden_bias() = {0.5, 0.0};
    const auto fwd = m.forward(mat({{2.0, 3.0}}));
    CHECK(fwd.embedding == mat({{2.5, 0.0}}));
  }

  TEST_CASE("probabilities are normalized and interior") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const Classifier m = random_model(rng, trial % 2 == 1);
      const auto x = testing::random_matrix(10, static_cast<std::size_t>(m.input_dim()), rng, 3.0);
      const auto p = m.predict_proba(x);
      for (std::size_t i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (double v : p.row(i)) {
          CHECK(v > 0.0);
          CHECK(v < 1.0);
          s += v;
        }
        CHECK(std::abs(s - 1.0) < 1e-9);
      }
    }
  }

  TEST_CASE("non-finite input is a numeric error") {
    Classifier m = Classifier::identity(2, 2);
    CHECK_THROWS_AS(m.forward(mat({{1.0, std::nan("")}})), NumericError);
    CHECK_THROWS_AS(m.forward(mat({{1.0, 2.0, 3.0}})), ConfigError);
  }

  TEST_CASE("cross entropy values") {
    CHECK(loss_ce(std::vector<double>{0.0, 1.0}, 1) == 0.0);
    CHECK(loss_ce(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 2) == doctest::Approx(1.386294).epsilon(1e-6));
    CHECK(loss_ce(std::vector<double>{0.75, 0.25}, 1) == doctest::Approx(-std::log(0.25)));
    CHECK(loss_ce(std::vector<double>{1.0, 0.0}, 1) == doctest::Approx(-std::log(1e-12)));
  }

  TEST_CASE("analytic gradients match central differences") {
    Rng rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
      const bool hidden = trial % 2 == 1;
      const Classifier m = random_model(rng, hidden);
      const Batch s = random_batch(rng, 1 + rng.index(5), m.input_dim(), m.num_classes());
      const Batch t = random_batch(rng, 1 + rng.index(5), m.input_dim(), m.num_classes());
      CAPTURE(trial);
      CHECK(max_relative_error(m, s, t) < 1e-6);
      CHECK(max_relative_error(m, s, Batch{}) < 1e-6);
    }
  }

  TEST_CASE("objective is the sum of the two batch means") {
    Rng rng(4);
    const Classifier m = random_model(rng, true);
    const Batch s = random_batch(rng, 3, m.input_dim(), m.num_classes());
    const Batch t = random_batch(rng, 4, m.input_dim(), m.num_classes());
    const auto p_s = m.predict_proba(s.x);
    const auto p_t = m.predict_proba(t.x);
    double ls = 0.0, lt = 0.0;
    for (std::size_t i = 0; i < 3; ++i) ls += loss_ce(p_s.row(i), s.y[i]);
    for (std::size_t i = 0; i < 4; ++i) lt += loss_ce(p_t.row(i), t.y[i]);
    CHECK(objective(m, s, t).loss == doctest::Approx(ls / 3 + lt / 4).epsilon(1e-12));
    CHECK(objective(m, s, t).loss >= 0.0);
    CHECK_THROWS_AS(objective(m, Batch{}, t), ConfigError);
  }

  TEST_CASE("a duplicated sample counts twice in the batch mean") {
    Rng rng(8);
    const Classifier m = random_model(rng, true);
    const Batch one = random_batch(rng, 2, m.input_dim(), m.num_classes());
    Batch a, b, dup;
    a.x.append_row(one.x.row(0));
    a.y = {one.y[0]};
    b.x.append_row(one.x.row(1));
    b.y = {one.y[1]};
    dup.x.append_row(one.x.row(0));
    dup.x.append_row(one.x.row(0));
    dup.x.append_row(one.x.row(1));
    dup.y = {one.y[0], one.y[0], one.y[1]};
    const auto ga = objective(m, a, Batch{}).gradient;
    const auto gb = objective(m, b, Batch{}).gradient;
    const auto gd = objective(m, dup, Batch{}).gradient;
    for (std::size_t k = 0; k < gd.size(); ++k) CHECK(gd[k] == doctest::Approx((2.0 * ga[k] + gb[k]) / 3.0).epsilon(1e-12));
  }

  TEST_CASE("zero learning rate leaves parameters unchanged") {
    Rng rng(1);
    Classifier m = random_model(rng, true);
    const Classifier before = m;
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    SgdMomentum opt(cfg);
    const Batch s = random_batch(rng, 4, m.input_dim(), m.num_classes());
    step_eq3(m, opt, s, s);
    step_eq3(m, opt, s, Batch{});
    CHECK(m == before);
  }

  TEST_CASE("momentum accumulates velocity") {
    Classifier m = Classifier::identity(1, 2);
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.momentum = 0.9;
    SgdMomentum opt(cfg);
    const std::vector<double> g{1.0, -2.0, 0.5, 0.0};
    opt.apply(m, g);
    opt.apply(m, g);
    const auto theta = m.flat_parameters();
    // theta = -lr g - lr (mu g + g)
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(theta[k] == doctest::Approx(-0.5 * g[k] * (1.0 + 1.9)));
  }

  TEST_CASE("the step returns the pre-update loss and moves downhill") {
    Rng rng(12);
    Classifier m = random_model(rng, false);
    const Batch s = random_batch(rng, 8, m.input_dim(), m.num_classes());
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.momentum = 0.0;
    SgdMomentum opt(cfg);
    const double before = objective(m, s, Batch{}).loss;
    CHECK(step_eq3(m, opt, s, Batch{}) == before);
    CHECK(objective(m, s, Batch{}).loss < before);
  }

  TEST_CASE("mixed objective with an identity augmenter equals the plain step") {
    Rng rng(5);
    Classifier a = random_model(rng, true);
    Classifier b = a;
    const Batch s = random_batch(rng, 4, a.input_dim(), a.num_classes());
    const Batch t = random_batch(rng, 3, a.input_dim(), a.num_classes());
    TrainConfig cfg;
    SgdMomentum oa(cfg), ob(cfg);
    const Augmenter identity = [](std::span<const double> x, Rng&) { return std::vector<double>(x.begin(), x.end()); };
    Rng r1(3);
    CHECK(step_eq5(a, oa, s, t, identity, r1) == step_eq3(b, ob, s, t));
    CHECK(a == b);
  }

  TEST_CASE("mixed objective equals the plain step on the augmented batch") {
    Rng rng(6);
    Classifier a = random_model(rng, true);
    Classifier b = a;
    const Batch s = random_batch(rng, 4, a.input_dim(), a.num_classes());
    const Batch t = random_batch(rng, 5, a.input_dim(), a.num_classes());
    TrainConfig cfg;
    SgdMomentum oa(cfg), ob(cfg);
    const Augmenter noisy = [](std::span<const double> x, Rng& r) {
      const double beta = r.beta(0.2, 0.2);
      std::vector<double> out(x.begin(), x.end());
      for (double& v : out) v = beta * v + (1.0 - beta) * (v + r.normal());
      return out;
    };
    Rng r1(44), r2(44);
    step_eq5(a, oa, s, t, noisy, r1);
    step_eq3(b, ob, s, augment_batch(t, noisy, r2));
    CHECK(a == b);
  }

  TEST_CASE("mixed objective gradients match central differences with frozen draws") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
      const Classifier m = random_model(rng, trial % 2 == 0);
      const Batch s = random_batch(rng, 3, m.input_dim(), m.num_classes());
      const Batch t = random_batch(rng, 4, m.input_dim(), m.num_classes());
      const Augmenter mix = [](std::span<const double> x, Rng& r) {
        const double beta = r.beta(0.2, 0.2);
        std::vector<double> out(x.begin(), x.end());
        for (double& v : out) {
          const double alpha = r.uniform() < 0.1 ? 0.0 : v + 0.5 * r.normal();
          v = beta * v + (1.0 - beta) * alpha;
        }
        return out;
      };
      Rng frozen(static_cast<std::uint64_t>(trial));
      const Batch mixed = augment_batch(t, mix, frozen);
      CAPTURE(trial);
      CHECK(max_relative_error(m, s, mixed) < 1e-6);
    }
  }

  TEST_CASE("separable toy set is fit exactly") {
    Rng rng(3);
    Batch data;
    for (int i = 0; i < 40; ++i) {
      const int y = i % 2;
      const double sign = y == 0 ? -1.0 : 1.0;
      data.x.append_row(std::vector<double>{sign * (0.5 + rng.uniform()), rng.normal()});
      data.y.push_back(y);
    }
    for (bool hidden : {false, true}) {
      Classifier m = hidden ? Classifier::hidden(2, 4, 2) : Classifier::identity(2, 2);
      Rng init(1);
      m.init_random(init);
      TrainConfig cfg;
      cfg.learning_rate = 0.05;
      SgdMomentum opt(cfg);
      for (int epoch = 0; epoch < 200; ++epoch) step_eq3(m, opt, data, Batch{});
      CHECK(evaluate(m, data.x, data.y).accuracy == 1.0);
    }
  }

  TEST_CASE("evaluation counts") {
    Classifier m = Classifier::identity(1, 2);
    m.head_bias() = {1.0, 0.0};  // always predicts class 0
    SUBCASE("balanced half right") {
      Matrix x(20, 1, 0.0);
      std::vector<int> y(20, 0);
      for (std::size_t i = 10; i < 20; ++i) y[i] = 1;
      const auto ev = evaluate(m, x, y);
      CHECK(ev.accuracy == 0.5);
      CHECK(ev.per_class_average == 0.5);
      CHECK(ev.per_class == std::vector<double>{1.0, 0.0});
    }
    SUBCASE("skewed 90/10") {
      Matrix x(100, 1, 0.0);
      std::vector<int> y(100, 0);
      for (std::size_t i = 90; i < 100; ++i) y[i] = 1;
      const auto ev = evaluate(m, x, y);
      CHECK(ev.accuracy == doctest::Approx(0.9));
      CHECK(ev.per_class_average == doctest::Approx(0.5));
    }
    SUBCASE("all correct, empty class left out, unlabeled skipped") {
      Matrix x(3, 1, 0.0);
      std::vector<int> y{0, 0, -1};
      const auto ev = evaluate(m, x, y);
      CHECK(ev.accuracy == 1.0);
      CHECK(ev.per_class_average == 1.0);
      CHECK(std::isnan(ev.per_class[1]));
    }
    SUBCASE("nothing labeled") {
      Matrix x(2, 1, 0.0);
      std::vector<int> y{-1, -1};
      CHECK_THROWS(evaluate(m, x, y));
    }
  }

  TEST_CASE("argmax ties go to the lower class") {
    CHECK(argmax(std::vector<double>{0.2, 0.4, 0.4}) == 1);
    CHECK(argmax(std::vector<double>{0.5, 0.5}) == 0);
  }

  TEST_CASE("checkpoint round trip") {
    Rng rng(10);
    const auto path = std::filesystem::temp_directory_path() / "lada_test_model.bin";
    for (bool hidden : {false, true}) {
      const Classifier m = random_model(rng, hidden);
      save_checkpoint(m, path);
      CHECK(load_checkpoint(path) == m);
    }
    std::filesystem::resize_file(path, 10);
    CHECK_THROWS_AS(load_checkpoint(path), DataError);
    std::filesystem::remove(path);
  }

  TEST_CASE("flat parameter layout") {
    Classifier m = Classifier::hidden(2, 3, 2);
    std::vector<double> theta(m.parameter_count());
    CHECK(theta.size() == 3 * 2 + 3 + 2 * 3 + 2);
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = static_cast<double>(k);
    m.set_flat_parameters(theta);
    CHECK(m.hidden_weights()(0, 1) == 1.0);
    CHECK(m.hidden_weights()(2, 0) == 4.0);
    CHECK(m.hidden_bias() == std::vector<double>{6.0, 7.0, 8.0});
    CHECK(m.head_weights()(1, 2) == 14.0);
    CHECK(m.head_bias() == std::vector<double>{15.0, 16.0});
    CHECK(m.flat_parameters() == theta);
  }
}
