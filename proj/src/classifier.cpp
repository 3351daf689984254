#include "lada/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "binary_io.hpp"
#include "lada/error.hpp"
#include "lada/kernels/kernels.hpp"
#include "lada/kernels/row_ops.hpp"

namespace lada {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train: learning rate must be > 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must be in [0, 1)");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (!(mix_beta_a > 0.0) || !(mix_beta_b > 0.0)) {
    throw ConfigError("train: mixup beta parameters must be > 0");
  }
}

Classifier Classifier::identity(int dim, int num_classes) {
  if (dim < 1 || num_classes < 1) throw ConfigError("classifier: dimensions must be positive");
  Classifier m;
  m.mode_ = EmbeddingMode::Identity;
  m.dim_ = dim;
  m.classes_ = num_classes;
  m.w_head_ = Matrix(num_classes, dim);
  m.b_head_.assign(num_classes, 0.0);
  return m;
}

Classifier Classifier::hidden(int dim, int hidden_dim, int num_classes) {
  if (dim < 1 || hidden_dim < 1 || num_classes < 1) {
    throw ConfigError("classifier: dimensions must be positive");
  }
  Classifier m;
  m.mode_ = EmbeddingMode::Hidden;
  m.dim_ = dim;
  m.hidden_ = hidden_dim;
  m.classes_ = num_classes;
  m.w_hidden_ = Matrix(hidden_dim, dim);
  m.b_hidden_.assign(hidden_dim, 0.0);
  m.w_head_ = Matrix(num_classes, hidden_dim);
  m.b_head_.assign(num_classes, 0.0);
  return m;
}

void Classifier::init_random(Rng& rng) {
  if (mode_ == EmbeddingMode::Hidden) {
    const double s = std::sqrt(2.0 / dim_);
    for (double& w : w_hidden_.values()) w = rng.normal(0.0, s);
    std::fill(b_hidden_.begin(), b_hidden_.end(), 0.0);
  }
  const double s = std::sqrt(1.0 / embed_dim());
  for (double& w : w_head_.values()) w = rng.normal(0.0, s);
  std::fill(b_head_.begin(), b_head_.end(), 0.0);
}

std::size_t Classifier::parameter_count() const noexcept {
  return w_hidden_.values().size() + b_hidden_.size() + w_head_.values().size() + b_head_.size();
}

std::vector<double> Classifier::flat_parameters() const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  auto put = [&theta](std::span<const double> s) { theta.insert(theta.end(), s.begin(), s.end()); };
  put(w_hidden_.values());
  put(b_hidden_);
  put(w_head_.values());
  put(b_head_);
  return theta;
}

void Classifier::set_flat_parameters(std::span<const double> theta) {
  if (theta.size() != parameter_count()) throw ConfigError("classifier: parameter count mismatch");
  auto it = theta.begin();
  auto take = [&it](std::span<double> dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  take(w_hidden_.values());
  take(b_hidden_);
  take(w_head_.values());
  take(b_head_);
}

ForwardResult Classifier::forward(const Matrix& x) const {
  if (x.cols() != static_cast<std::size_t>(dim_) && !x.empty()) {
    throw ConfigError("classifier: feature length " + std::to_string(x.cols()) + " != " +
                      std::to_string(dim_));
  }
  for (double v : x.values()) {
    if (!std::isfinite(v)) throw NumericError("classifier: non-finite input feature");
  }
  ForwardResult out;
  if (mode_ == EmbeddingMode::Identity) {
    out.embedding = x;
  } else {
    kernels::parallel::affine(x, w_hidden_, b_hidden_, true, out.embedding);
  }
  kernels::parallel::affine(out.embedding, w_head_, b_head_, false, out.probs);
  kernels::parallel::softmax_rows(out.probs);
  return out;
}

double loss_ce(std::span<const double> probs, int label) {
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], 1e-12));
}

std::size_t argmax(std::span<const double> v) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

namespace {

// Accumulates scale * d CE / d theta for one sample into `grad`.
double accumulate_sample(const Classifier& m, std::span<const double> x, int label, double scale,
                         std::vector<double>& grad) {
  const auto C = static_cast<std::size_t>(m.num_classes());
  const auto d = static_cast<std::size_t>(m.input_dim());
  const auto e = static_cast<std::size_t>(m.embed_dim());
  const bool hidden = m.mode() == EmbeddingMode::Hidden;
  if (label < 0 || static_cast<std::size_t>(label) >= C) {
    throw ConfigError("objective: label " + std::to_string(label) + " out of range");
  }
  if (x.size() != d) throw ConfigError("objective: feature length mismatch");

  std::vector<double> pre, emb;
  if (hidden) {
    pre.resize(e);
    kernels::rows::affine_row(x, m.hidden_weights(), m.hidden_bias(), false, pre);
    emb.resize(e);
    for (std::size_t j = 0; j < e; ++j) emb[j] = pre[j] > 0.0 ? pre[j] : 0.0;
  } else {
    emb.assign(x.begin(), x.end());
  }
  std::vector<double> p(C);
  kernels::rows::affine_row(emb, m.head_weights(), m.head_bias(), false, p);
  kernels::rows::softmax_row(p);
  const double loss = loss_ce(p, label);

  // Offsets into the flat layout.
  const std::size_t head_w = hidden ? e * d + e : 0;
  const std::size_t head_b = head_w + C * e;
  std::vector<double> dz(C);
  for (std::size_t c = 0; c < C; ++c) {
    dz[c] = scale * (p[c] - (static_cast<int>(c) == label ? 1.0 : 0.0));
    for (std::size_t j = 0; j < e; ++j) grad[head_w + c * e + j] += dz[c] * emb[j];
    grad[head_b + c] += dz[c];
  }
  if (hidden) {
    for (std::size_t j = 0; j < e; ++j) {
      if (pre[j] <= 0.0) continue;
      double da = 0.0;
      for (std::size_t c = 0; c < C; ++c) da += m.head_weights()(c, j) * dz[c];
      for (std::size_t k = 0; k < d; ++k) grad[j * d + k] += da * x[k];
      grad[e * d + j] += da;
    }
  }
  return loss;
}

}  // namespace

LossAndGradient objective(const Classifier& model, const Batch& source, const Batch& target) {
  if (source.empty()) throw ConfigError("objective: empty source batch");
  LossAndGradient out;
  out.gradient.assign(model.parameter_count(), 0.0);
  for (const Batch* b : {&source, &target}) {
    if (b->empty()) continue;
    if (b->x.rows() != b->y.size()) throw ConfigError("objective: batch rows/labels mismatch");
    const double scale = 1.0 / static_cast<double>(b->size());
    double sum = 0.0;
    for (std::size_t i = 0; i < b->size(); ++i) {
      sum += accumulate_sample(model, b->x.row(i), b->y[i], scale, out.gradient);
    }
    out.loss += sum * scale;
  }
  if (!std::isfinite(out.loss)) throw NumericError("objective: non-finite loss");
  return out;
}

void SgdMomentum::apply(Classifier& model, std::span<const double> gradient) {
  auto theta = model.flat_parameters();
  if (velocity_.size() != theta.size()) velocity_.assign(theta.size(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] + gradient[i];
    theta[i] -= lr_ * velocity_[i];
    if (!std::isfinite(theta[i])) throw NumericError("sgd: parameter diverged");
  }
  model.set_flat_parameters(theta);
}

double step_eq3(Classifier& model, SgdMomentum& opt, const Batch& source,
                const Batch& labeled_target) {
  auto lg = objective(model, source, labeled_target);
  opt.apply(model, lg.gradient);
  return lg.loss;
}

Batch augment_batch(const Batch& batch, const Augmenter& augment, Rng& rng) {
  Batch out;
  out.y = batch.y;
  out.x = Matrix(batch.x.rows(), batch.x.cols());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto mixed = augment(batch.x.row(i), rng);
    std::copy(mixed.begin(), mixed.end(), out.x.row(i).begin());
  }
  return out;
}

double step_eq5(Classifier& model, SgdMomentum& opt, const Batch& source, const Batch& anchors,
                const Augmenter& augment, Rng& rng) {
  return step_eq3(model, opt, source, augment_batch(anchors, augment, rng));
}

Evaluation evaluate(const Classifier& model, const Matrix& x, std::span<const int> labels) {
  if (x.rows() != labels.size()) throw ConfigError("evaluate: rows/labels mismatch");
  const auto C = static_cast<std::size_t>(model.num_classes());
  Evaluation ev;
  ev.class_counts.assign(C, 0);
  std::vector<std::size_t> correct(C, 0);
  std::size_t total = 0, hits = 0;
  const Matrix probs = model.predict_proba(x);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    const auto y = static_cast<std::size_t>(labels[i]);
    if (y >= C) throw DataError("evaluate: label out of range");
    ++total;
    ++ev.class_counts[y];
    if (argmax(probs.row(i)) == y) {
      ++hits;
      ++correct[y];
    }
  }
  if (total == 0) throw DataError("evaluate: no labeled samples");
  ev.accuracy = static_cast<double>(hits) / static_cast<double>(total);
  ev.per_class.assign(C, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < C; ++c) {
    if (ev.class_counts[c] == 0) continue;
    ev.per_class[c] = static_cast<double>(correct[c]) / static_cast<double>(ev.class_counts[c]);
    sum += ev.per_class[c];
    ++present;
  }
  ev.per_class_average = sum / static_cast<double>(present);
  return ev;
}

namespace {
constexpr char kModelMagic[8] = {'L', 'A', 'D', 'A', 'M', 'D', 'L', '1'};
}

void save_checkpoint(const Classifier& model, const std::filesystem::path& path) {
  std::string buf(kModelMagic, kModelMagic + 8);
  detail::put_le<std::uint8_t>(buf, static_cast<std::uint8_t>(model.mode()));
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(model.input_dim()));
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(model.hidden_dim()));
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(model.num_classes()));
  for (double v : model.flat_parameters()) detail::put_le<double>(buf, v);
  detail::write_file(path, buf);
}

Classifier load_checkpoint(const std::filesystem::path& path) {
  detail::ByteReader<DataError> in(detail::read_file(path), "checkpoint");
  for (char expected : kModelMagic) {
    if (in.get<char>("magic") != expected) throw DataError("checkpoint: bad magic at offset 0");
  }
  const auto mode = in.get<std::uint8_t>("mode");
  const auto d = in.get<std::uint32_t>("input dim");
  const auto h = in.get<std::uint32_t>("hidden dim");
  const auto C = in.get<std::uint32_t>("class count");
  if (mode > 1) throw DataError("checkpoint: bad mode byte at offset 8");
  if (d == 0 || C == 0 || (mode == 1 && h == 0)) throw DataError("checkpoint: bad dimensions");
  Classifier m = mode == 0 ? Classifier::identity(static_cast<int>(d), static_cast<int>(C))
                           : Classifier::hidden(static_cast<int>(d), static_cast<int>(h),
                                                static_cast<int>(C));
  std::vector<double> theta(m.parameter_count());
  for (double& v : theta) v = in.get<double>("parameters");
  if (!in.at_end()) throw DataError("checkpoint: trailing bytes at offset " + std::to_string(in.offset()));
  m.set_flat_parameters(theta);
  return m;
}

}  // namespace lada
