// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Detector output decoding: score filtering, cxcywh -> xyxy, per-class NMS
// and reading-order sorting of text regions.

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "resume_ie/geometry.hpp"
#include "resume_ie/ingest.hpp"

namespace resume_ie {

inline constexpr double kDefaultConfThreshold = 0.25;
inline constexpr double kDefaultNmsIou = 0.45;

/// Raw detector rows: (cx, cy, w, h, score_0 .. score_{C-1}) in 640-space pixels.
using DetTensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TextRegion {
  Box box;  // 640-space
  double score = 0.0;
  int class_id = 0;
  std::optional<int> order_index;

  bool operator==(const TextRegion&) const = default;
};

/// Detector inference port: one page in, one tensor out. Exclusive-use per worker.
class DetectorPort {
 public:
  virtual ~DetectorPort() = default;
  virtual DetTensor infer(const PageImage& page) = 0;
};

/// Keeps rows whose best class score reaches `conf_threshold`; boxes clamped to
/// the canvas. Rows that clamp to zero area are dropped.
std::vector<TextRegion> decode(const DetTensor& rows, double conf_threshold = kDefaultConfThreshold);

/// Greedy, score-descending, per-class suppression. Equal scores keep input order.
std::vector<TextRegion> nms(const std::vector<TextRegion>& regions, double iou_threshold = kDefaultNmsIou);

/// Rows top-to-bottom, left-to-right within a row; sets order_index and
/// returns the regions in that order.
std::vector<TextRegion> reading_order(std::vector<TextRegion> regions);

}  // namespace resume_ie
