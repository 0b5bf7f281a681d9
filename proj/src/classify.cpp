// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/classify.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "resume_ie/metrics.hpp"

namespace resume_ie {

std::string_view pooling_name(Pooling p) {
  switch (p) {
    case Pooling::cls: return "cls";
    case Pooling::mean: return "mean";
    case Pooling::last: return "last";
  }
  return "cls";
}

Pooling pooling_from_name(std::string_view name) {
  if (name == "cls") return Pooling::cls;
  if (name == "mean") return Pooling::mean;
  if (name == "last") return Pooling::last;
  throw PreconditionError("unknown pooling '" + std::string(name) + "' (expected cls, mean or last)");
}

Pooling default_pooling(std::string_view model_name) {
  return scheme_for_model(model_name) == TokenizerScheme::unigram ? Pooling::last : Pooling::cls;
}

Eigen::VectorXd embed(const TokenSequence& seq, EmbeddingPort& port, Pooling pooling) {
  int first = -1, last = -1, count = 0;
  for (int i = 0; i < kMaxSequenceLength; ++i) {
    if (!seq.mask[static_cast<std::size_t>(i)]) continue;
    if (first < 0) first = i;
    last = i;
    ++count;
  }
  if (count == 0) throw PreconditionError("embed: attention mask is all zero");

  Eigen::MatrixXd states;
  try {
    states = port.hidden_states(seq);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw PortError(std::string("embedding port failed: ") + e.what());
  }
  if (states.rows() != kMaxSequenceLength || states.cols() != port.hidden_dim()) {
    throw PortError("embedding port returned " + std::to_string(states.rows()) + "x" +
                    std::to_string(states.cols()) + ", expected " + std::to_string(kMaxSequenceLength) + "x" +
                    std::to_string(port.hidden_dim()));
  }

  switch (pooling) {
    case Pooling::cls: return states.row(first).transpose();
    case Pooling::last: return states.row(last).transpose();
    case Pooling::mean: break;
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(states.cols());
  for (int i = 0; i < kMaxSequenceLength; ++i) {
    if (seq.mask[static_cast<std::size_t>(i)]) acc += states.row(i).transpose();
  }
  return acc / static_cast<double>(count);
}

Eigen::MatrixXd embed_all(const std::vector<TokenSequence>& seqs, EmbeddingPort& port, Pooling pooling) {
  Eigen::MatrixXd out(port.hidden_dim(), static_cast<Eigen::Index>(seqs.size()));
  for (std::size_t i = 0; i < seqs.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = embed(seqs[i], port, pooling);
  return out;
}

// --- optimizer --------------------------------------------------------------

void adam_step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::Ref<const Eigen::MatrixXd>& grad, AdamState& state,
               double lr, const AdamConfig& cfg) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw PreconditionError("adam_step: parameter and gradient shapes differ");
  }
  if (!grad.allFinite()) throw PreconditionError("adam_step: non-finite gradient");
  if (state.m.rows() != param.rows() || state.m.cols() != param.cols()) {
    state.m = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    state.v = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    state.step = 0;
  }
  ++state.step;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  param.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

void HeadOptimizer::step(ClassifierHead& head, const HeadGradients<double>& grads) {
  if (!grads.all_finite()) throw PreconditionError("adam_step: non-finite gradient");
  adam_step(head.w1, grads.w1, w1_, lr_, cfg_);
  adam_step(head.b1, grads.b1, b1_, lr_, cfg_);
  adam_step(head.w2, grads.w2, w2_, lr_, cfg_);
  adam_step(head.b2, grads.b2, b2_, lr_, cfg_);
}

// --- training ---------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) throw PreconditionError("learning rate must be positive");
  if (batch_size < 1) throw PreconditionError("batch size must be >= 1");
  if (max_epochs < 1) throw PreconditionError("max_epochs must be >= 1");
  if (patience < 1) throw PreconditionError("patience must be >= 1");
  if (hidden < 1) throw PreconditionError("hidden width must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw PreconditionError("dropout must be in [0, 1)");
}

namespace {

void check_labels(const Eigen::MatrixXd& x, const std::vector<int>& y, const char* what) {
  if (x.cols() == 0) throw PreconditionError(std::string(what) + " split is empty");
  if (static_cast<std::size_t>(x.cols()) != y.size()) {
    throw PreconditionError(std::string(what) + ": embedding count differs from label count");
  }
  if (!x.allFinite()) throw PreconditionError(std::string(what) + ": non-finite embedding");
  for (int label : y) {
    if (label < 0 || label >= kNumClasses) throw PreconditionError(std::string(what) + ": label out of range");
  }
}

}  // namespace

TrainResult train_head(const Eigen::MatrixXd& train_x, const std::vector<int>& train_y, const Eigen::MatrixXd& val_x,
                       const std::vector<int>& val_y, const TrainConfig& config) {
  config.validate();
  check_labels(train_x, train_y, "train");
  check_labels(val_x, val_y, "val");
  if (train_x.rows() != val_x.rows()) throw PreconditionError("train and val embedding widths differ");

  ClassCounts counts{};
  for (int y : train_y) ++counts[static_cast<std::size_t>(y)];

  TrainResult result;
  result.weights = compute_class_weights(counts);

  std::mt19937_64 rng(config.seed);
  const int dim = static_cast<int>(train_x.rows());
  ClassifierHead head = ClassifierHead::random(dim, config.hidden, config.dropout, rng);
  HeadOptimizer opt(config.lr, config.adam);

  const Eigen::Index n = train_x.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  double best_f1 = -std::numeric_limits<double>::infinity();
  int stale = 0;
  result.head = head;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += config.batch_size) {
      const Eigen::Index b = std::min<Eigen::Index>(config.batch_size, n - start);
      Eigen::MatrixXd xb(train_x.rows(), b);
      std::vector<int> yb(static_cast<std::size_t>(b));
      for (Eigen::Index j = 0; j < b; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(start + j)];
        xb.col(j) = train_x.col(src);
        yb[static_cast<std::size_t>(j)] = train_y[static_cast<std::size_t>(src)];
      }
      DropoutMasks<double> masks;
      const bool use_dropout = head.dropout_p > 0.0;
      if (use_dropout) masks = sample_dropout(head, b, rng);
      const auto acts = head_forward_batch<double>(xb, head, use_dropout ? &masks : nullptr);
      const auto lg = weighted_ce<double>(acts.logits, yb, result.weights);
      const auto grads = head_backward(head, acts, lg.dlogits, use_dropout ? &masks : nullptr);
      opt.step(head, grads);
      loss_sum += lg.loss * static_cast<double>(b);
    }

    const auto val_acts = head_forward_batch<double>(val_x, head);
    const auto val_lg = weighted_ce<double>(val_acts.logits, val_y, result.weights);
    std::vector<int> pred(val_y.size());
    for (Eigen::Index j = 0; j < val_acts.logits.cols(); ++j) {
      pred[static_cast<std::size_t>(j)] = argmax_lowest(val_acts.logits.col(j));
    }
    const F1Report rep = f1_report(confusion(val_y, pred, kNumClasses));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    rec.val_loss = val_lg.loss;
    rec.val_f1_macro = rep.macro;
    rec.val_f1_micro = rep.micro;
    rec.val_f1_weighted = rep.weighted;
    result.history.push_back(rec);

    if (rep.macro > best_f1) {
      best_f1 = rep.macro;
      result.head = head;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  return result;
}

TrainResult train_head(const std::vector<TokenSequence>& train, const std::vector<int>& train_y,
                       const std::vector<TokenSequence>& val, const std::vector<int>& val_y, EmbeddingPort& port,
                       Pooling pooling, const TrainConfig& config) {
  config.validate();
  return train_head(embed_all(train, port, pooling), train_y, embed_all(val, port, pooling), val_y, config);
}

std::vector<int> predict_ids(const ClassifierHead& head, const Eigen::MatrixXd& x) {
  const auto acts = head_forward_batch<double>(x, head);
  std::vector<int> out(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) out[static_cast<std::size_t>(j)] = argmax_lowest(acts.logits.col(j));
  return out;
}

// --- prediction -------------------------------------------------------------

int argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) throw PreconditionError("argmax of an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<int>(best);
}

Prediction predict_from_logits(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  if (logits.size() != kNumClasses) throw PreconditionError("expected 5 logits");
  Prediction p;
  p.label = class_from_id(argmax_lowest(logits));
  p.probabilities = softmax(Eigen::MatrixXd(logits)).col(0);
  return p;
}

Prediction predict(std::string_view text, const Tokenizer& tokenizer, EmbeddingPort& port, Pooling pooling,
                   const ClassifierHead& head, const NormalizationRules& rules) {
  const TokenSequence seq = tokenizer.encode(normalize(text, rules));
  const Eigen::VectorXd x = embed(seq, port, pooling);
  if (x.size() != head.input_dim()) {
    throw PreconditionError("embedding width " + std::to_string(x.size()) + " does not match head input " +
                            std::to_string(head.input_dim()));
  }
  return predict_from_logits(head_forward_batch<double>(Eigen::MatrixXd(x), head).logits.col(0));
}

// --- checkpoint -------------------------------------------------------------

namespace {

constexpr char kHeadMagic[8] = {'R', 'I', 'E', 'H', 'E', 'A', 'D', '\0'};
constexpr std::uint32_t kHeadVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t raw(int n) {
    if (pos_ + static_cast<std::size_t>(n) > bytes_.size()) throw FormatError("head checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]))
           << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  double f64() { return std::bit_cast<double>(raw(8)); }
  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("head checkpoint truncated");
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_head(const ClassifierHead& head) {
  if (head.w1.rows() != head.b1.size() || head.w2.cols() != head.w1.rows() || head.w2.rows() != kNumClasses ||
      head.b2.size() != kNumClasses) {
    throw PreconditionError("serialize_head: inconsistent head shapes");
  }
  std::string out(kHeadMagic, sizeof kHeadMagic);
  put_u32(out, kHeadVersion);
  put_u32(out, static_cast<std::uint32_t>(head.input_dim()));
  put_u32(out, static_cast<std::uint32_t>(head.hidden_dim()));
  put_u32(out, kNumClasses);
  put_f64(out, head.dropout_p);
  for (Eigen::Index i = 0; i < head.w1.rows(); ++i)
    for (Eigen::Index j = 0; j < head.w1.cols(); ++j) put_f64(out, head.w1(i, j));
  for (Eigen::Index i = 0; i < head.b1.size(); ++i) put_f64(out, head.b1(i));
  for (Eigen::Index i = 0; i < head.w2.rows(); ++i)
    for (Eigen::Index j = 0; j < head.w2.cols(); ++j) put_f64(out, head.w2(i, j));
  for (Eigen::Index i = 0; i < head.b2.size(); ++i) put_f64(out, head.b2(i));
  return out;
}

ClassifierHead deserialize_head(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof kHeadMagic) != std::string_view(kHeadMagic, sizeof kHeadMagic)) {
    throw FormatError("not a head checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kHeadVersion) throw FormatError("unsupported head checkpoint version " + std::to_string(version));
  const std::uint32_t d = r.u32(), h = r.u32(), k = r.u32();
  if (k != kNumClasses) throw FormatError("head checkpoint has " + std::to_string(k) + " classes, expected 5");
  if (d == 0 || h == 0) throw FormatError("head checkpoint has a zero dimension");
  const std::uint64_t expected = 8ull * (static_cast<std::uint64_t>(h) * d + h + std::uint64_t{k} * h + k) + 8;
  if (r.remaining() != expected) throw FormatError("head checkpoint size does not match its header");

  ClassifierHead head = ClassifierHead::zeros(static_cast<int>(d), static_cast<int>(h));
  head.dropout_p = r.f64();
  for (Eigen::Index i = 0; i < head.w1.rows(); ++i)
    for (Eigen::Index j = 0; j < head.w1.cols(); ++j) head.w1(i, j) = r.f64();
  for (Eigen::Index i = 0; i < head.b1.size(); ++i) head.b1(i) = r.f64();
  for (Eigen::Index i = 0; i < head.w2.rows(); ++i)
    for (Eigen::Index j = 0; j < head.w2.cols(); ++j) head.w2(i, j) = r.f64();
  for (Eigen::Index i = 0; i < head.b2.size(); ++i) head.b2(i) = r.f64();
  if (!(head.dropout_p >= 0.0 && head.dropout_p < 1.0)) throw FormatError("head checkpoint dropout out of range");
  if (!head.all_finite()) throw FormatError("head checkpoint contains non-finite parameters");
  return head;
}

void save_head(const std::filesystem::path& path, const ClassifierHead& head) {
  const std::string bytes = serialize_head(head);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

ClassifierHead load_head(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open head checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_head(ss.str());
}

}  // namespace resume_ie
