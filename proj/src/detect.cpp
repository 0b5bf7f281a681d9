// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "resume_ie/error.hpp"

namespace resume_ie {

std::vector<TextRegion> decode(const DetTensor& rows, double conf_threshold) {
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) {
    throw PreconditionError("conf_threshold must lie in [0, 1]");
  }
  std::vector<TextRegion> out;
  if (rows.rows() == 0) return out;
  if (rows.cols() < 5) throw FormatError("detector rows need at least 5 columns");

  const double canvas = kCanvasSize;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    Eigen::Index best = 0;
    const double score = rows.row(r).tail(rows.cols() - 4).maxCoeff(&best);
    if (!(score >= conf_threshold)) continue;
    const double cx = rows(r, 0), cy = rows(r, 1);
    const double hw = rows(r, 2) / 2, hh = rows(r, 3) / 2;
    Box box{std::clamp(cx - hw, 0.0, canvas), std::clamp(cy - hh, 0.0, canvas),
            std::clamp(cx + hw, 0.0, canvas), std::clamp(cy + hh, 0.0, canvas)};
    if (!(box.x1 < box.x2 && box.y1 < box.y2)) continue;
    out.push_back({box, score, static_cast<int>(best), std::nullopt});
  }
  return out;
}

std::vector<TextRegion> nms(const std::vector<TextRegion>& regions, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw PreconditionError("iou_threshold must lie in (0, 1]");
  }
  std::vector<std::size_t> order(regions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return regions[a].score > regions[b].score;
  });

  std::vector<TextRegion> kept;
  for (std::size_t idx : order) {
    const auto& cand = regions[idx];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const TextRegion& k) {
      return k.class_id == cand.class_id && iou(k.box, cand.box) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

std::vector<TextRegion> reading_order(std::vector<TextRegion> regions) {
  std::stable_sort(regions.begin(), regions.end(), [](const TextRegion& a, const TextRegion& b) {
    if (a.box.center_y() != b.box.center_y()) return a.box.center_y() < b.box.center_y();
    return a.box.x1 < b.box.x1;
  });

  std::vector<std::vector<TextRegion>> rows;
  for (auto& r : regions) {
    if (!rows.empty()) {
      const auto& anchor = rows.back().front();
      const double tol = 0.5 * std::min(anchor.box.height(), r.box.height());
      if (std::abs(r.box.center_y() - anchor.box.center_y()) <= tol) {
        rows.back().push_back(std::move(r));
        continue;
      }
    }
    rows.push_back({std::move(r)});
  }

  std::vector<TextRegion> out;
  out.reserve(regions.size());
  for (auto& row : rows) {
    std::stable_sort(row.begin(), row.end(),
                     [](const TextRegion& a, const TextRegion& b) { return a.box.x1 < b.box.x1; });
    for (auto& r : row) {
      r.order_index = static_cast<int>(out.size());
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace resume_ie
