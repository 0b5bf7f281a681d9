// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic reference implementations of the inference ports, loaded from
// small "key = value" model descriptors. They stand in for exported networks
// in tests and in the bundled fixture.
//
// Stripe code: every character is a 3 px wide solid column block whose gray
// level is 2*i+1 (i = charset index), followed by a 1 px white gap. Lines are
// 6 px tall with 3 px between lines. Only odd gray levels below 200 count as
// ink, so the even letterbox padding (114) is never read as text.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "resume_ie/classify.hpp"
#include "resume_ie/detect.hpp"
#include "resume_ie/ocr.hpp"

namespace resume_ie {

inline constexpr int kStripeCharWidth = 3;
inline constexpr int kStripeCharGap = 1;
inline constexpr int kStripeLineHeight = 6;
inline constexpr int kStripeLineGap = 3;
inline constexpr int kStripeInkLimit = 200;

/// Parsed descriptor: keys in file order, repeated keys allowed.
struct ModelDescriptor {
  std::filesystem::path path;
  std::vector<std::pair<std::string, std::string>> entries;

  std::string kind() const;
  /// Last value for `key`, or `fallback`.
  std::string get(const std::string& key, const std::string& fallback = {}) const;
  std::vector<std::string> all(const std::string& key) const;
  /// Value resolved against the descriptor's directory.
  std::filesystem::path path_of(const std::string& key) const;
};

/// Throws PortError for interchange-format networks (no runtime in this
/// build) and FormatError for malformed descriptors.
ModelDescriptor load_model_descriptor(const std::filesystem::path& path);

// --- detector ---------------------------------------------------------------

/// Finds stripe-coded text groups: ink mask, square dilation, connected
/// components, one row (cx, cy, w, h, score) per component's ink extent.
class StripeDetector final : public DetectorPort {
 public:
  explicit StripeDetector(int dilate = 11, double score = 0.9, int min_area = 4)
      : dilate_(dilate), score_(score), min_area_(min_area) {}
  DetTensor infer(const PageImage& page) override;

 private:
  int dilate_;
  double score_;
  int min_area_;
};

/// Emits the same rows for every page.
class FixedDetector final : public DetectorPort {
 public:
  explicit FixedDetector(DetTensor rows) : rows_(std::move(rows)) {}
  DetTensor infer(const PageImage&) override { return rows_; }

 private:
  DetTensor rows_;
};

// --- recognizer -------------------------------------------------------------

/// Reads stripe codes column by column; one timestep per column, white
/// columns are blanks, a space plus blank separates lines.
class StripeRecognizer final : public RecognizerPort {
 public:
  explicit StripeRecognizer(Charset charset) : charset_(std::move(charset)) {}
  LogitSeq infer(const cv::Mat& crop) override;
  const Charset& charset() const override { return charset_; }

 private:
  Charset charset_;
};

/// Logits that greedy-decode to a fixed string, whatever the crop.
class FixedRecognizer final : public RecognizerPort {
 public:
  FixedRecognizer(Charset charset, std::string text);
  LogitSeq infer(const cv::Mat&) override { return logits_; }
  const Charset& charset() const override { return charset_; }

 private:
  Charset charset_;
  LogitSeq logits_;
};

/// One-hot style logits (`high` on the label, 0 elsewhere) for a label path.
LogitSeq logits_for_path(const std::vector<int>& path, int num_symbols, double high = 10.0);

/// Label path for `text`: each character once, blanks between repeats.
std::vector<int> path_for_text(const std::string& text, const Charset& charset);

// --- embedding --------------------------------------------------------------

/// Frozen bag-of-tokens encoder: every token id owns a seeded Gaussian vector
/// e(id); position i of a sequence maps to tanh(e(id_i) + mean over the mask
/// of e). Stateless, hence reentrant.
class HashedBagEmbedding final : public EmbeddingPort {
 public:
  HashedBagEmbedding(int dim, std::uint64_t seed);
  int hidden_dim() const override { return dim_; }
  Eigen::MatrixXd hidden_states(const TokenSequence& seq) override;
  bool reentrant() const override { return true; }

  Eigen::VectorXd token_vector(int id) const;

 private:
  int dim_;
  std::uint64_t seed_;
};

// --- factories --------------------------------------------------------------

std::unique_ptr<DetectorPort> load_detector(const std::filesystem::path& descriptor);
std::unique_ptr<RecognizerPort> load_recognizer(const std::filesystem::path& descriptor);
std::unique_ptr<EmbeddingPort> load_embedding(const std::filesystem::path& descriptor);

// --- stripe rendering -------------------------------------------------------

/// Greedy word wrap at `max_chars`; the space at each break is consumed.
std::vector<std::string> wrap_words(const std::string& text, std::size_t max_chars);

struct StripeBlock {
  int x = 0;
  int y = 0;
  std::size_t max_chars = 50;
  std::string text;
};

/// Pixel extent of a rendered block, [x1, x2) x [y1, y2).
Box stripe_block_extent(const StripeBlock& block);

/// White BGR canvas with every block drawn. Throws if a character is missing
/// from the charset or its index cannot be stripe-coded.
cv::Mat render_stripe_page(const std::vector<StripeBlock>& blocks, const Charset& charset, int width = 640,
                           int height = 640);

}  // namespace resume_ie
