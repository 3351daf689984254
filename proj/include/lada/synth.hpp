#pragma once

#include <cstdint>
#include <vector>

#include "lada/dataset.hpp"

namespace lada {

/// Two-domain Gaussian mixture. Target samples are drawn from the source
/// class-conditionals with the std scaled by `covariance_ratio`, then rotated
/// by `rotation` radians in every consecutive coordinate pair (0,1), (2,3), ...
/// and translated by `translation` along a seeded unit direction.
struct SynthConfig {
  int num_classes = 8;
  int dim = 16;
  int samples_per_class = 250;
  double class_radius = 3.0;
  double within_std = 1.0;
  double rotation = 0.0;
  double translation = 0.0;
  double covariance_ratio = 1.0;
  double rsut_gamma = 1.0;
  std::uint64_t seed = 0;
};

Dataset gen_synthetic(const SynthConfig& cfg);

struct Retention {
  std::vector<double> source;
  std::vector<double> target;
};

/// Geometric label-shift profile: source class c keeps gamma^(-c/(C-1)),
/// target class c keeps gamma^(-(C-1-c)/(C-1)).
Retention rsut_retention(int num_classes, double gamma);

/// Keeps the first round(retention * count) samples of every class in each
/// domain (sample order within a class is already random for synthetic data).
Dataset apply_rsut(const Dataset& ds, double gamma);

/// Mean feature per class; throws DataError naming the first empty class.
std::vector<std::vector<double>> class_prototypes(std::span<const Sample> samples,
                                                  int num_classes);

/// Adds xi_c = sum_i r[c][i] (p_i - p_c) to every source feature of class c,
/// with p the source prototypes. Target data and labels are untouched.
Dataset perturb_source_with(const Dataset& ds, const std::vector<std::vector<double>>& r);

/// Draws r[c][i] ~ U(-u, u) row by row from `seed`, then applies
/// perturb_source_with.
Dataset perturb_source(const Dataset& ds, double u, std::uint64_t seed);

}  // namespace lada
