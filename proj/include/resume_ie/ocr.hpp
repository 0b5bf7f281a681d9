// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Region cropping, recognizer port and greedy (best-path) CTC decoding.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <opencv2/core.hpp>

#include "resume_ie/detect.hpp"
#include "resume_ie/error.hpp"
#include "resume_ie/ingest.hpp"

namespace resume_ie {

inline constexpr int kCtcBlank = 0;
inline constexpr int kDefaultCropMargin = 2;

/// CTC alphabet. Index 0 is the blank; symbols()[i] is the text of index i + 1.
class Charset {
 public:
  Charset() = default;
  explicit Charset(std::vector<std::string> symbols);

  /// One symbol per line, line i is index i + 1. A line holding a single space
  /// is the space symbol; "\r\n" endings are accepted.
  static Charset load(const std::filesystem::path& path);

  /// Number of non-blank symbols (S); logits have S + 1 columns.
  int size() const { return static_cast<int>(symbols_.size()); }
  const std::string& symbol(int index) const;
  const std::vector<std::string>& symbols() const { return symbols_; }
  /// Index of a symbol, or -1.
  int index_of(const std::string& symbol) const;

 private:
  std::vector<std::string> symbols_;
};

/// Per-timestep logits, T x (S + 1).
using LogitSeq = Eigen::MatrixXd;

struct CtcDecoded {
  std::string text;
  double mean_confidence = 0.0;
  std::vector<int> labels;  // collapsed label sequence, blanks removed
};

/// Best path: per-row argmax (ties to the lower index), collapse repeats, drop
/// blanks. Confidence is the mean softmax probability over emitted steps, 0
/// when nothing is emitted.
CtcDecoded ctc_greedy_decode(const LogitSeq& logits, const Charset& charset);

struct OcrResult {
  TextRegion region;
  std::string text;
  double mean_confidence = 0.0;
};

/// Recognizer inference port: one crop in, T x (S + 1) logits out. The port
/// owns any model-specific preprocessing. Exclusive-use per worker.
class RecognizerPort {
 public:
  virtual ~RecognizerPort() = default;
  virtual LogitSeq infer(const cv::Mat& crop) = 0;
  virtual const Charset& charset() const = 0;
};

/// Raised when the recognizer fails on one region.
class RecognitionError : public PortError {
 public:
  RecognitionError(int region_index, const std::string& what)
      : PortError("recognizer failed on region " + std::to_string(region_index) + ": " + what),
        region_index_(region_index) {}
  int region_index() const { return region_index_; }

 private:
  int region_index_;
};

/// Sub-image of `region` grown by `margin` pixels and clamped to the page.
cv::Mat crop(const PageImage& page, const TextRegion& region, int margin = kDefaultCropMargin);

/// One result per region, ordered by order_index when every region has one.
/// Empty decodes are kept with empty text.
std::vector<OcrResult> recognize(const PageImage& page, const std::vector<TextRegion>& regions,
                                 RecognizerPort& port, int margin = kDefaultCropMargin);

}  // namespace resume_ie
