#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "lada/matrix.hpp"
#include "lada/rng.hpp"

namespace lada {

enum class EmbeddingMode : std::uint8_t { Identity = 0, Hidden = 1 };

struct TrainConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  std::size_t batch_size = 32;
  double mix_beta_a = 0.2;
  double mix_beta_b = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Labeled mini-batch; `x.row(i)` has class `y[i]`.
struct Batch {
  Matrix x;
  std::vector<int> y;

  std::size_t size() const noexcept { return y.size(); }
  bool empty() const noexcept { return y.empty(); }
};

struct ForwardResult {
  Matrix embedding;
  Matrix probs;
};

/// h = g o f: f is the identity or a ReLU layer, g a linear softmax head.
///
/// Flat parameter order (shared by gradients and checkpoints):
///   hidden weights (h x d, row-major), hidden bias (h),
///   head weights (C x e, row-major), head bias (C),
/// where e = d in Identity mode and e = h otherwise. Identity mode has no
/// hidden block.
class Classifier {
 public:
  Classifier() = default;
  static Classifier identity(int dim, int num_classes);
  static Classifier hidden(int dim, int hidden_dim, int num_classes);

  /// He-scaled Gaussian hidden weights, Xavier-scaled head, zero biases.
  void init_random(Rng& rng);

  EmbeddingMode mode() const noexcept { return mode_; }
  int input_dim() const noexcept { return dim_; }
  int hidden_dim() const noexcept { return hidden_; }
  int embed_dim() const noexcept { return mode_ == EmbeddingMode::Identity ? dim_ : hidden_; }
  int num_classes() const noexcept { return classes_; }

  std::size_t parameter_count() const noexcept;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> theta);

  Matrix& head_weights() noexcept { return w_head_; }
  std::vector<double>& head_bias() noexcept { return b_head_; }
  Matrix& hidden_weights() noexcept { return w_hidden_; }
  std::vector<double>& hidden_bias() noexcept { return b_hidden_; }
  const Matrix& head_weights() const noexcept { return w_head_; }
  const std::vector<double>& head_bias() const noexcept { return b_head_; }
  const Matrix& hidden_weights() const noexcept { return w_hidden_; }
  const std::vector<double>& hidden_bias() const noexcept { return b_hidden_; }

  /// Batched forward pass through the parallel kernels. Throws
  /// NumericError on non-finite input.
  ForwardResult forward(const Matrix& x) const;
  Matrix predict_proba(const Matrix& x) const { return forward(x).probs; }
  Matrix embed(const Matrix& x) const { return forward(x).embedding; }

  bool operator==(const Classifier&) const = default;

 private:
  EmbeddingMode mode_ = EmbeddingMode::Identity;
  int dim_ = 0;
  int hidden_ = 0;
  int classes_ = 0;
  Matrix w_hidden_;
  std::vector<double> b_hidden_;
  Matrix w_head_;
  std::vector<double> b_head_;
};

/// -ln(max(probs[label], 1e-12)).
double loss_ce(std::span<const double> probs, int label);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Mean cross entropy over `source` plus mean cross entropy over `target`,
/// with the gradient in flat parameter order. An empty target batch drops
/// the second term; an empty source batch is a ConfigError.
LossAndGradient objective(const Classifier& model, const Batch& source, const Batch& target);

/// SGD with momentum: v <- mu v + g, theta <- theta - lr v.
class SgdMomentum {
 public:
  explicit SgdMomentum(const TrainConfig& cfg) : lr_(cfg.learning_rate), momentum_(cfg.momentum) {}
  void apply(Classifier& model, std::span<const double> gradient);

 private:
  double lr_;
  double momentum_;
  std::vector<double> velocity_;
};

/// One update on the fine-tuning objective; returns the pre-update loss.
double step_eq3(Classifier& model, SgdMomentum& opt, const Batch& source,
                const Batch& labeled_target);

/// Maps an anchor feature to its mixed view x~ = beta x + (1 - beta) alpha(x).
using Augmenter = std::function<std::vector<double>(std::span<const double>, Rng&)>;

/// Applies `augment` to every row of `batch`, in row order.
Batch augment_batch(const Batch& batch, const Augmenter& augment, Rng& rng);

/// One update on the mixed-augmentation objective: clean source CE plus CE
/// on the augmented anchors. Returns the pre-update loss.
double step_eq5(Classifier& model, SgdMomentum& opt, const Batch& source, const Batch& anchors,
                const Augmenter& augment, Rng& rng);

struct Evaluation {
  double accuracy = 0.0;
  double per_class_average = 0.0;
  std::vector<double> per_class;        // NaN for classes without samples
  std::vector<std::size_t> class_counts;
};

/// Argmax accuracy (ties to the lower class). Labels of -1 are skipped;
/// classes without samples are left out of the per-class mean.
Evaluation evaluate(const Classifier& model, const Matrix& x, std::span<const int> labels);

std::size_t argmax(std::span<const double> v) noexcept;

void save_checkpoint(const Classifier& model, const std::filesystem::path& path);
Classifier load_checkpoint(const std::filesystem::path& path);

}  // namespace lada
