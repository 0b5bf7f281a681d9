// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "resume_ie/classify.hpp"
#include "resume_ie/error.hpp"
#include "resume_ie/reference_ports.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

namespace {

// Row i of the hidden states is (i, 10 i, ...) so pooled rows are recognizable.
class RowIndexPort final : public EmbeddingPort {
 public:
  explicit RowIndexPort(int dim = 3) : dim_(dim) {}
  int hidden_dim() const override { return dim_; }
  Eigen::MatrixXd hidden_states(const TokenSequence&) override {
    Eigen::MatrixXd h(kMaxSequenceLength, dim_);
    for (int i = 0; i < kMaxSequenceLength; ++i)
      for (int d = 0; d < dim_; ++d) h(i, d) = i * std::pow(10.0, d);
    return h;
  }

 private:
  int dim_;
};

class ConstantPort final : public EmbeddingPort {
 public:
  explicit ConstantPort(Eigen::VectorXd v) : v_(std::move(v)) {}
  int hidden_dim() const override { return static_cast<int>(v_.size()); }
  Eigen::MatrixXd hidden_states(const TokenSequence&) override {
    return v_.transpose().replicate(kMaxSequenceLength, 1);
  }

 private:
  Eigen::VectorXd v_;
};

class ThrowingPort final : public EmbeddingPort {
 public:
  int hidden_dim() const override { return 2; }
  Eigen::MatrixXd hidden_states(const TokenSequence&) override { throw std::runtime_error("device lost"); }
};

class WrongShapePort final : public EmbeddingPort {
 public:
  int hidden_dim() const override { return 2; }
  Eigen::MatrixXd hidden_states(const TokenSequence&) override { return Eigen::MatrixXd::Zero(3, 2); }
};

TokenSequence seq_of_length(int n) {
  TokenSequence s;
  s.true_length = n;
  for (int i = 0; i < n; ++i) s.mask[static_cast<std::size_t>(i)] = 1;
  return s;
}

}  // namespace

TEST_CASE("pooling names and family defaults") {
  CHECK(pooling_from_name("mean") == Pooling::mean);
  CHECK(pooling_name(Pooling::last) == "last");
  CHECK_THROWS_AS(pooling_from_name("max"), PreconditionError);
  CHECK(default_pooling("bert") == Pooling::cls);
  CHECK(default_pooling("roberta") == Pooling::cls);
  CHECK(default_pooling("xlnet") == Pooling::last);
}

TEST_CASE("embedding pooling") {
  RowIndexPort port;
  const auto s = seq_of_length(4);
  CHECK(embed(s, port, Pooling::cls)(0) == 0.0);
  CHECK(embed(s, port, Pooling::last)(0) == 3.0);
  CHECK(embed(s, port, Pooling::mean)(1) == doctest::Approx(15.0));

  Eigen::VectorXd v(3);
  v << 0.5, -2.0, 7.0;
  ConstantPort constant(v);
  CHECK(embed(s, constant, Pooling::mean).isApprox(v));
  CHECK(embed(s, constant, Pooling::cls) == v);

  CHECK_THROWS_AS(embed(TokenSequence{}, port, Pooling::mean), PreconditionError);
  ThrowingPort bad;
  CHECK_THROWS_AS(embed(s, bad, Pooling::cls), PortError);
  WrongShapePort wrong;
  CHECK_THROWS_AS(embed(s, wrong, Pooling::cls), PortError);

  const auto all = embed_all({s, seq_of_length(2)}, port, Pooling::last);
  CHECK(all.rows() == 3);
  CHECK(all.cols() == 2);
  CHECK(all(0, 1) == 1.0);
}

TEST_CASE("zero head predicts uniformly with ties to class 0") {
  const auto head = ClassifierHead::zeros(4, 3);
  std::mt19937_64 rng(1);
  const Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  const Eigen::VectorXd z = head_forward<double>(x, head, false, rng);
  CHECK(z.isZero());
  const auto p = predict_from_logits(z);
  CHECK(p.label == ClassLabel::education);
  for (int c = 0; c < kNumClasses; ++c) CHECK(p.probabilities(c) == doctest::Approx(0.2));
  CHECK(argmax_lowest(Eigen::VectorXd::Zero(5)) == 0);
}

TEST_CASE("eval mode is deterministic and train mode applies dropout") {
  std::mt19937_64 rng(2);
  const auto head = ClassifierHead::random(8, 16, 0.5, rng);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(8);
  const Eigen::VectorXd a = head_forward<double>(x, head, false, rng);
  CHECK(a == head_forward<double>(x, head, false, rng));
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs |= !(head_forward<double>(x, head, true, rng) == a);
  CHECK(differs);

  auto no_drop = head;
  no_drop.dropout_p = 0.0;
  CHECK(head_forward<double>(x, no_drop, true, rng) == head_forward<double>(x, no_drop, false, rng));
}

TEST_CASE("weighted cross entropy limits") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(kNumClasses, 2);
  z(1, 0) = 60.0;
  z(3, 1) = 60.0;
  ClassWeights w;
  w.weights = {1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(weighted_ce<double>(z, {1, 3}, w).loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(weighted_ce<double>(z, {1}, w), PreconditionError);
  CHECK_THROWS_AS(weighted_ce<double>(z, {1, 7}, w), PreconditionError);
}

TEST_CASE("softmax columns sum to one") {
  Eigen::MatrixXd z(kNumClasses, 3);
  z.setRandom();
  z *= 100.0;
  const auto p = softmax(z);
  for (int j = 0; j < 3; ++j) CHECK(p.col(j).sum() == doctest::Approx(1.0));
}

TEST_CASE("adam first step and fixed point") {
  Eigen::MatrixXd param = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Constant(1, 1, 3.0);
  AdamState st;
  AdamConfig cfg;
  cfg.eps = 1e-15;
  adam_step(param, grad, st, 0.001, cfg);
  CHECK(param(0, 0) == doctest::Approx(-0.001).epsilon(1e-9));

  Eigen::MatrixXd still = Eigen::MatrixXd::Constant(2, 2, 1.5);
  AdamState st2;
  for (int i = 0; i < 20; ++i) adam_step(still, Eigen::MatrixXd::Zero(2, 2), st2, 0.1);
  CHECK(still == Eigen::MatrixXd::Constant(2, 2, 1.5));

  Eigen::MatrixXd bad = grad;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd before = param;
  CHECK_THROWS_AS(adam_step(param, bad, st, 0.001), PreconditionError);
  CHECK(param == before);
  CHECK_THROWS_AS(adam_step(param, Eigen::MatrixXd::Zero(2, 1), st, 0.001), PreconditionError);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg.lr = 0.001;
  cfg.dropout = 1.0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
}

TEST_CASE("early stopping with patience 1 stops after two flat epochs") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x(4, 10);
  x.setRandom();
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) y.push_back(i % kNumClasses);
  TrainConfig cfg;
  cfg.lr = 1e-12;  // parameters effectively frozen, validation F1 cannot improve
  cfg.patience = 1;
  cfg.max_epochs = 50;
  cfg.hidden = 4;
  const auto r = train_head(x, y, x, y, cfg);
  CHECK(r.history.size() == 2);
  CHECK(r.best_epoch == 1);
  CHECK(r.history[0].epoch == 1);

  CHECK_THROWS_AS(train_head(x, {0, 1}, x, y, cfg), PreconditionError);
  std::vector<int> missing(10, 0);
  CHECK_THROWS_AS(train_head(x, missing, x, y, cfg), PreconditionError);
}

TEST_CASE("checkpoint round trip and corruption") {
  std::mt19937_64 rng(4);
  const auto head = ClassifierHead::random(6, 5, 0.25, rng);
  const auto bytes = serialize_head(head);
  const auto back = deserialize_head(bytes);
  CHECK(back.w1 == head.w1);
  CHECK(back.b1 == head.b1);
  CHECK(back.w2 == head.w2);
  CHECK(back.b2 == head.b2);
  CHECK(back.dropout_p == head.dropout_p);

  const fs::path p = fs::temp_directory_path() / "resume_ie_head.bin";
  save_head(p, head);
  CHECK(serialize_head(load_head(p)) == bytes);
  fs::remove(p);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(deserialize_head(bad_magic), FormatError);
  CHECK_THROWS_AS(deserialize_head(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(deserialize_head(""), FormatError);
  CHECK_THROWS(load_head("/nonexistent/head.bin"));
}

TEST_CASE("fixture head classifies the sample sections") {
  const fs::path fx = RESUME_IE_FIXTURE_DIR;
  const auto tok = WordPieceTokenizer::load(fx / "vocab.txt");
  auto port = load_embedding(fx / "backbone.model");
  const auto head = load_head(fx / "head.bin");
  const auto rules = NormalizationRules::defaults();
  CHECK(predict("SKILLS C++ Python C# Java SQL", tok, *port, Pooling::cls, head, rules).label == ClassLabel::skill);
  CHECK(predict("LANGUAGE Turkish English", tok, *port, Pooling::cls, head, rules).label == ClassLabel::language);
}
