#include "lada/synth.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "lada/error.hpp"
#include "lada/rng.hpp"

namespace lada {

namespace {

std::vector<double> random_direction(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double n = 0.0;
  while (n == 0.0) {
    for (double& x : v) x = rng.normal();
    n = norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

// Rotation by `angle` in each coordinate pair (0,1), (2,3), ...; an odd
// trailing coordinate is left alone.
void rotate_pairs(std::vector<double>& x, double angle) {
  if (angle == 0.0) return;
  const double c = std::cos(angle), s = std::sin(angle);
  for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
    const double a = x[i], b = x[i + 1];
    x[i] = c * a - s * b;
    x[i + 1] = s * a + c * b;
  }
}

void check_config(const SynthConfig& cfg) {
  if (cfg.num_classes < 2) throw ConfigError("synthetic: num_classes must be >= 2");
  if (cfg.dim < 2) throw ConfigError("synthetic: dim must be >= 2");
  if (cfg.samples_per_class < 1) throw ConfigError("synthetic: samples_per_class must be >= 1");
  for (double v : {cfg.class_radius, cfg.within_std, cfg.translation, cfg.covariance_ratio}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError("synthetic: magnitudes must be finite and non-negative");
    }
  }
  if (!std::isfinite(cfg.rotation)) throw ConfigError("synthetic: rotation must be finite");
  if (!(cfg.rsut_gamma >= 1.0) || !std::isfinite(cfg.rsut_gamma)) {
    throw ConfigError("synthetic: rsut_gamma must be >= 1");
  }
}

}  // namespace

Dataset gen_synthetic(const SynthConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  const auto C = static_cast<std::size_t>(cfg.num_classes);
  const auto per = static_cast<std::size_t>(cfg.samples_per_class);

  std::vector<std::vector<double>> means;
  for (std::size_t c = 0; c < C; ++c) {
    auto m = random_direction(rng, cfg.dim);
    for (double& x : m) x *= cfg.class_radius;
    means.push_back(std::move(m));
  }
  const auto shift_dir = random_direction(rng, cfg.dim);

  auto draw = [&](std::size_t c, double std) {
    std::vector<double> x = means[c];
    for (double& v : x) v += std * rng.normal();
    return x;
  };

  // Samples are generated class by class, then given ids in a shuffled
  // order so id tie-breaks carry no class information.
  auto make_domain = [&](bool is_target) {
    std::vector<std::pair<std::vector<double>, int>> rows;
    rows.reserve(C * per);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < per; ++k) {
        if (!is_target) {
          rows.emplace_back(draw(c, cfg.within_std), static_cast<int>(c));
        } else {
          auto x = draw(c, cfg.within_std * cfg.covariance_ratio);
          rotate_pairs(x, cfg.rotation);
          for (std::size_t j = 0; j < x.size(); ++j) x[j] += cfg.translation * shift_dir[j];
          rows.emplace_back(std::move(x), static_cast<int>(c));
        }
      }
    }
    for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.index(i)]);
    return rows;
  };

  Dataset ds(cfg.dim, cfg.num_classes);
  Id next = 0;
  for (auto& [x, y] : make_domain(false)) ds.add_source(next++, std::move(x), y);
  for (auto& [x, y] : make_domain(true)) ds.add_target(next++, std::move(x), y);

  if (cfg.rsut_gamma > 1.0) return apply_rsut(ds, cfg.rsut_gamma);
  return ds;
}

Retention rsut_retention(int num_classes, double gamma) {
  if (!(gamma >= 1.0)) throw ConfigError("rsut: gamma must be >= 1");
  Retention r;
  const double span = num_classes > 1 ? num_classes - 1 : 1;
  for (int c = 0; c < num_classes; ++c) {
    r.source.push_back(std::pow(gamma, -c / span));
    r.target.push_back(std::pow(gamma, -(num_classes - 1 - c) / span));
  }
  return r;
}

Dataset apply_rsut(const Dataset& ds, double gamma) {
  const int C = ds.num_classes();
  const auto ret = rsut_retention(C, gamma);

  auto quota = [&](const std::vector<std::size_t>& counts, const std::vector<double>& keep,
                   const char* domain) {
    std::vector<std::size_t> q(counts.size());
    for (std::size_t c = 0; c < counts.size(); ++c) {
      q[c] = static_cast<std::size_t>(std::llround(keep[c] * static_cast<double>(counts[c])));
      if (q[c] == 0) {
        throw DataError(std::string("rsut: ") + domain + " class " + std::to_string(c) +
                        " emptied entirely");
      }
    }
    return q;
  };

  std::vector<std::size_t> src_counts(C, 0), tgt_counts(C, 0);
  for (const auto& s : ds.source) ++src_counts[static_cast<std::size_t>(*s.label)];
  for (const auto& s : ds.target) {
    if (auto y = OracleAccess::peek(ds.oracle, s.id)) ++tgt_counts[static_cast<std::size_t>(*y)];
  }
  auto src_quota = quota(src_counts, ret.source, "source");
  auto tgt_quota = quota(tgt_counts, ret.target, "target");

  Dataset out(ds.dim(), C);
  out.label_budget = ds.label_budget;
  for (const auto& s : ds.source) {
    auto& left = src_quota[static_cast<std::size_t>(*s.label)];
    if (left == 0) continue;
    --left;
    out.source.push_back(s);
  }
  for (const auto& s : ds.target) {
    auto truth = OracleAccess::peek(ds.oracle, s.id);
    if (truth) {
      auto& left = tgt_quota[static_cast<std::size_t>(*truth)];
      if (left == 0) continue;
      --left;
    }
    out.add_target(s.id, s.feature, truth);
    out.target.back().label = s.label;
    if (ds.target_labeled_ids.count(s.id)) out.target_labeled_ids.insert(s.id);
  }
  return out;
}

std::vector<std::vector<double>> class_prototypes(std::span<const Sample> samples,
                                                  int num_classes) {
  if (num_classes < 1) throw ConfigError("prototypes: num_classes must be positive");
  const std::size_t dim = samples.empty() ? 0 : samples.front().feature.size();
  std::vector<std::vector<double>> sums(num_classes, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(num_classes, 0);
  for (const auto& s : samples) {
    if (!s.label || *s.label < 0 || *s.label >= num_classes) {
      throw DataError("prototypes: sample " + std::to_string(s.id) + " lacks a valid label");
    }
    auto c = static_cast<std::size_t>(*s.label);
    for (std::size_t j = 0; j < dim; ++j) sums[c][j] += s.feature[j];
    ++counts[c];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) throw DataError("prototypes: class " + std::to_string(c) + " is empty");
    for (double& v : sums[c]) v /= static_cast<double>(counts[c]);
  }
  return sums;
}

Dataset perturb_source_with(const Dataset& ds, const std::vector<std::vector<double>>& r) {
  const int C = ds.num_classes();
  if (r.size() != static_cast<std::size_t>(C)) throw ConfigError("perturb: r must have C rows");
  const auto protos = class_prototypes(ds.source, C);
  const std::size_t dim = static_cast<std::size_t>(ds.dim());

  std::vector<std::vector<double>> xi(C, std::vector<double>(dim, 0.0));
  for (int c = 0; c < C; ++c) {
    if (r[c].size() != static_cast<std::size_t>(C)) throw ConfigError("perturb: r must be C x C");
    for (int i = 0; i < C; ++i) {
      for (std::size_t j = 0; j < dim; ++j) xi[c][j] += r[c][i] * (protos[i][j] - protos[c][j]);
    }
  }
  Dataset out = ds;
  for (auto& s : out.source) {
    const auto& shift = xi[static_cast<std::size_t>(*s.label)];
    for (std::size_t j = 0; j < dim; ++j) s.feature[j] += shift[j];
  }
  return out;
}

Dataset perturb_source(const Dataset& ds, double u, std::uint64_t seed) {
  if (!(u >= 0.0) || !std::isfinite(u)) throw ConfigError("perturb: u must be finite and >= 0");
  if (u == 0.0) return ds;
  Rng rng(seed);
  const auto C = static_cast<std::size_t>(ds.num_classes());
  std::vector<std::vector<double>> r(C, std::vector<double>(C));
  for (auto& row : r) {
    for (double& v : row) v = rng.uniform(-u, u);
  }
  return perturb_source_with(ds, r);
}

}  // namespace lada
