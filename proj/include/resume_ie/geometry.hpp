// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>

namespace resume_ie {

/// Axis-aligned box, corners (x1, y1) top-left and (x2, y2) bottom-right.
template <typename Scalar>
struct BasicBox {
  Scalar x1{}, y1{}, x2{}, y2{};

  Scalar width() const { return x2 - x1; }
  Scalar height() const { return y2 - y1; }
  Scalar area() const { return std::max<Scalar>(0, width()) * std::max<Scalar>(0, height()); }
  Scalar center_x() const { return (x1 + x2) / 2; }
  Scalar center_y() const { return (y1 + y2) / 2; }

  bool operator==(const BasicBox&) const = default;
};

using Box = BasicBox<double>;

/// Intersection over union; 0 for disjoint boxes or an empty union.
template <typename Scalar>
Scalar iou(const BasicBox<Scalar>& a, const BasicBox<Scalar>& b) {
  const Scalar iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const Scalar ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0;
  const Scalar inter = iw * ih;
  const Scalar uni = a.area() + b.area() - inter;
  return uni > 0 ? inter / uni : Scalar(0);
}

}  // namespace resume_ie
