// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Frozen-backbone embedding port and the two-linear-layer classification head:
//
//   logits = W2 * drop(relu(W1 * drop(x) + b1)) + b2
//
// Batches are column-major: one sample per column.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resume_ie/corpus.hpp"
#include "resume_ie/error.hpp"
#include "resume_ie/textprep.hpp"
#include "resume_ie/tokenizers.hpp"

namespace resume_ie {

inline constexpr int kDefaultHiddenWidth = 128;
inline constexpr double kDefaultDropout = 0.1;

// --- embedding port ---------------------------------------------------------

enum class Pooling { cls, mean, last };

std::string_view pooling_name(Pooling p);
Pooling pooling_from_name(std::string_view name);
/// cls for bert/distilbert/roberta, last for xlnet.
Pooling default_pooling(std::string_view model_name);

/// Frozen backbone: per-position hidden states for one sequence. Never
/// updated by training. Exclusive-use per worker unless reentrant().
class EmbeddingPort {
 public:
  virtual ~EmbeddingPort() = default;
  virtual int hidden_dim() const = 0;
  /// kMaxSequenceLength x hidden_dim().
  virtual Eigen::MatrixXd hidden_states(const TokenSequence& seq) = 0;
  virtual bool reentrant() const { return false; }
};

/// Pooled embedding over mask = 1 positions. cls takes the first position,
/// last the final unmasked one.
Eigen::VectorXd embed(const TokenSequence& seq, EmbeddingPort& port, Pooling pooling);

/// Embeds every sequence; result is hidden_dim x N.
Eigen::MatrixXd embed_all(const std::vector<TokenSequence>& seqs, EmbeddingPort& port, Pooling pooling);

// --- head -------------------------------------------------------------------

template <typename Scalar>
struct BasicClassifierHead {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix w1;  // H x D
  Vector b1;  // H
  Matrix w2;  // 5 x H
  Vector b2;  // 5
  Scalar dropout_p = Scalar(kDefaultDropout);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }

  static BasicClassifierHead zeros(int input_dim, int hidden_dim, Scalar dropout = Scalar(kDefaultDropout)) {
    BasicClassifierHead h;
    h.w1 = Matrix::Zero(hidden_dim, input_dim);
    h.b1 = Vector::Zero(hidden_dim);
    h.w2 = Matrix::Zero(kNumClasses, hidden_dim);
    h.b2 = Vector::Zero(kNumClasses);
    h.dropout_p = dropout;
    return h;
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every parameter.
  static BasicClassifierHead random(int input_dim, int hidden_dim, Scalar dropout, std::mt19937_64& rng) {
    BasicClassifierHead h = zeros(input_dim, hidden_dim, dropout);
    auto fill = [&rng](auto& m, int fan_in) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = Scalar(u(rng));
    };
    fill(h.w1, input_dim);
    fill(h.b1, input_dim);
    fill(h.w2, hidden_dim);
    fill(h.b2, hidden_dim);
    return h;
  }

  template <typename Other>
  BasicClassifierHead<Other> cast() const {
    BasicClassifierHead<Other> h;
    h.w1 = w1.template cast<Other>();
    h.b1 = b1.template cast<Other>();
    h.w2 = w2.template cast<Other>();
    h.b2 = b2.template cast<Other>();
    h.dropout_p = Other(dropout_p);
    return h;
  }

  bool all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
  }
};

using ClassifierHead = BasicClassifierHead<double>;

/// Inverted-dropout keep masks, already scaled by 1/(1-p).
template <typename Scalar>
struct DropoutMasks {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> input;   // D x B
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hidden;  // H x B
};

template <typename Scalar>
DropoutMasks<Scalar> sample_dropout(const BasicClassifierHead<Scalar>& head, Eigen::Index batch,
                                    std::mt19937_64& rng) {
  const double p = static_cast<double>(head.dropout_p);
  const Scalar keep_scale = Scalar(1.0 / (1.0 - p));
  std::bernoulli_distribution keep(1.0 - p);
  auto draw = [&](Eigen::Index rows) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, batch);
    for (Eigen::Index j = 0; j < batch; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = keep(rng) ? keep_scale : Scalar(0);
    return m;
  };
  DropoutMasks<Scalar> masks;
  masks.input = draw(head.input_dim());
  masks.hidden = draw(head.hidden_dim());
  return masks;
}

/// Intermediate activations kept for the backward pass.
template <typename Scalar>
struct HeadActivations {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix x_dropped;  // D x B
  Matrix pre;        // H x B, before ReLU
  Matrix h_dropped;  // H x B
  Matrix logits;     // 5 x B
};

/// Batch forward pass. `masks` null means evaluation mode (no dropout).
template <typename Scalar>
HeadActivations<Scalar> head_forward_batch(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& x,
    const BasicClassifierHead<Scalar>& head, const DropoutMasks<Scalar>* masks = nullptr) {
  HeadActivations<Scalar> a;
  a.x_dropped = masks ? x.cwiseProduct(masks->input).eval() : x.eval();
  a.pre = (head.w1 * a.x_dropped).colwise() + head.b1;
  a.h_dropped = a.pre.cwiseMax(Scalar(0));
  if (masks) a.h_dropped = a.h_dropped.cwiseProduct(masks->hidden);
  a.logits = (head.w2 * a.h_dropped).colwise() + head.b2;
  return a;
}

/// Single-sample forward. Dropout is applied only when `train_mode` is set.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> head_forward(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& x,
    const BasicClassifierHead<Scalar>& head, bool train_mode, std::mt19937_64& rng) {
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> xb = x;
  if (train_mode && head.dropout_p > Scalar(0)) {
    const auto masks = sample_dropout(head, 1, rng);
    return head_forward_batch<Scalar>(xb, head, &masks).logits.col(0);
  }
  return head_forward_batch<Scalar>(xb, head).logits.col(0);
}

/// Gradients of a scalar loss with respect to every head parameter.
template <typename Scalar>
using HeadGradients = BasicClassifierHead<Scalar>;

/// Backward pass from dL/dlogits (5 x B).
template <typename Scalar>
HeadGradients<Scalar> head_backward(const BasicClassifierHead<Scalar>& head,
                                    const HeadActivations<Scalar>& a,
                                    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& dlogits,
                                    const DropoutMasks<Scalar>* masks = nullptr) {
  HeadGradients<Scalar> g;
  g.dropout_p = head.dropout_p;
  g.w2 = dlogits * a.h_dropped.transpose();
  g.b2 = dlogits.rowwise().sum();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dh = head.w2.transpose() * dlogits;
  if (masks) dh = dh.cwiseProduct(masks->hidden);
  dh = dh.cwiseProduct((a.pre.array() > Scalar(0)).template cast<Scalar>().matrix());
  g.w1 = dh * a.x_dropped.transpose();
  g.b1 = dh.rowwise().sum();
  return g;
}

/// Column-wise numerically stable softmax.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      (logits.rowwise() - logits.colwise().maxCoeff()).array().exp().matrix();
  out.array().rowwise() /= out.colwise().sum().array();
  return out;
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss{};
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dlogits;  // 5 x B
};

/// L = sum_i w[y_i] * -log softmax(z_i)[y_i] / sum_i w[y_i], and dL/dz.
template <typename Scalar>
LossAndGradient<Scalar> weighted_ce(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& logits,
    const std::vector<int>& labels, const ClassWeights& weights) {
  if (static_cast<std::size_t>(logits.cols()) != labels.size() || logits.rows() != kNumClasses) {
    throw PreconditionError("weighted_ce expects 5 x B logits and B labels");
  }
  LossAndGradient<Scalar> out;
  out.dlogits = softmax(logits);
  Scalar total{0};
  Scalar weight_sum{0};
  for (Eigen::Index i = 0; i < logits.cols(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= kNumClasses) throw PreconditionError("label out of range");
    const Scalar w = Scalar(weights[y]);
    const auto col = logits.col(i);
    const Scalar mx = col.maxCoeff();
    const Scalar log_z = mx + std::log((col.array() - mx).exp().sum());
    total += w * (log_z - col(y));
    weight_sum += w;
    out.dlogits(y, i) -= Scalar(1);
    out.dlogits.col(i) *= w;
  }
  if (weight_sum > Scalar(0)) {
    out.loss = total / weight_sum;
    out.dlogits /= weight_sum;
  }
  return out;
}

// --- optimizer --------------------------------------------------------------

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moments for one parameter tensor.
struct AdamState {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
  long step = 0;
};

/// In-place bias-corrected Adam update. Throws before touching anything if
/// `grad` has a non-finite entry.
void adam_step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::Ref<const Eigen::MatrixXd>& grad,
               AdamState& state, double lr, const AdamConfig& cfg = {});

/// Adam over all four head tensors in lockstep.
class HeadOptimizer {
 public:
  HeadOptimizer(double lr, AdamConfig cfg = {}) : lr_(lr), cfg_(cfg) {}
  void step(ClassifierHead& head, const HeadGradients<double>& grads);

 private:
  double lr_;
  AdamConfig cfg_;
  AdamState w1_, b1_, w2_, b2_;
};

// --- training ---------------------------------------------------------------

struct TrainConfig {
  double lr = 0.001;
  AdamConfig adam;
  int batch_size = 32;
  int max_epochs = 200;
  int patience = 10;
  int hidden = kDefaultHiddenWidth;
  double dropout = kDefaultDropout;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_f1_macro = 0.0;
  double val_f1_micro = 0.0;
  double val_f1_weighted = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  ClassifierHead head;  // best validation F1-macro
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  ClassWeights weights;
};

/// Trains on pre-computed embeddings (D x N). Class weights come from the
/// training labels. Stops after `patience` epochs without a strictly better
/// validation F1-macro, or at max_epochs.
TrainResult train_head(const Eigen::MatrixXd& train_x, const std::vector<int>& train_y,
                       const Eigen::MatrixXd& val_x, const std::vector<int>& val_y,
                       const TrainConfig& config);

/// Embeds both splits once through the frozen port, then trains.
TrainResult train_head(const std::vector<TokenSequence>& train, const std::vector<int>& train_y,
                       const std::vector<TokenSequence>& val, const std::vector<int>& val_y,
                       EmbeddingPort& port, Pooling pooling, const TrainConfig& config);

/// Eval-mode class ids (argmax, ties to the lowest id) for D x N embeddings.
std::vector<int> predict_ids(const ClassifierHead& head, const Eigen::MatrixXd& x);

// --- prediction -------------------------------------------------------------

struct Prediction {
  ClassLabel label = ClassLabel::education;
  Eigen::Matrix<double, kNumClasses, 1> probabilities;
};

/// Argmax with ties to the lowest class id.
int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& v);

Prediction predict_from_logits(const Eigen::Ref<const Eigen::VectorXd>& logits);

/// normalize -> encode -> embed -> head (eval) -> softmax.
Prediction predict(std::string_view text, const Tokenizer& tokenizer, EmbeddingPort& port,
                   Pooling pooling, const ClassifierHead& head, const NormalizationRules& rules);

// --- checkpoint -------------------------------------------------------------

/// Little-endian layout:
///   "RIEHEAD\0"  u32 version(1)  u32 D  u32 H  u32 K(5)  f64 dropout_p
///   f64 W1[H*D] row-major, f64 b1[H], f64 W2[K*H] row-major, f64 b2[K]
void save_head(const std::filesystem::path& path, const ClassifierHead& head);
ClassifierHead load_head(const std::filesystem::path& path);
std::string serialize_head(const ClassifierHead& head);
ClassifierHead deserialize_head(std::string_view bytes);

}  // namespace resume_ie
