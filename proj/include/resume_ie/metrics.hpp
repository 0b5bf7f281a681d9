// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Classification metrics (confusion matrix, F1 micro/macro/weighted) and
// detection metrics (IoU, all-points AP, mAP50, mAP50-95).

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "resume_ie/geometry.hpp"

namespace resume_ie {

// --- classification ---------------------------------------------------------

/// Rows are true classes, columns predicted classes.
using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

ConfusionMatrix confusion(const std::vector<int>& labels_true, const std::vector<int>& labels_pred, int num_classes);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct F1Report {
  std::vector<ClassScores> per_class;
  double micro = 0.0;
  double macro = 0.0;
  double weighted = 0.0;
};

/// 0/0 is taken as 0 for precision, recall and F1. Macro averages all K
/// classes; weighted uses support, so zero-support classes weigh nothing.
/// Throws PreconditionError on an all-zero matrix.
F1Report f1_report(const ConfusionMatrix& cm);

// --- detection --------------------------------------------------------------

struct GroundTruthBox {
  std::string image_id;
  int class_id = 0;
  Box box;
};

struct ScoredBox {
  std::string image_id;
  int class_id = 0;
  double score = 0.0;
  Box box;
};

/// One class: predictions ranked by descending score (input order on ties),
/// each greedily matched to the unmatched same-image ground truth of highest
/// IoU >= threshold (lowest index on IoU ties). AP is the area under the
/// monotone (all-points) precision envelope. Class ids are not inspected.
double average_precision(const std::vector<ScoredBox>& preds, const std::vector<GroundTruthBox>& gts,
                         double iou_threshold);

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::array<double, 10> coco_iou_thresholds();

struct DetectionEval {
  std::vector<int> class_ids;                       // classes with at least one ground truth
  std::vector<std::array<double, 10>> ap;           // per class, per threshold
  double map50 = 0.0;
  double map50_95 = 0.0;
};

/// Evaluates every class that has ground truth. `image_ids` lists the images
/// of the dataset (images without boxes included); a prediction or ground truth
/// on any other image is an error.
DetectionEval map_eval(const std::vector<std::string>& image_ids, const std::vector<ScoredBox>& preds,
                       const std::vector<GroundTruthBox>& gts);

/// "image_id class score x1 y1 x2 y2" per line, pixel coordinates.
std::vector<ScoredBox> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, const std::vector<ScoredBox>& preds);

/// "class cx cy w h" per line, normalized to [0, 1] of a `canvas` x `canvas`
/// image; returned in pixels.
std::vector<GroundTruthBox> load_normalized_labels(const std::filesystem::path& path,
                                                   const std::string& image_id, double canvas = 640.0);

struct LabelDirectory {
  std::vector<std::string> image_ids;  // file stems, sorted
  std::vector<GroundTruthBox> boxes;
};

/// Every *.txt in `dir`, image id = file stem.
LabelDirectory load_label_directory(const std::filesystem::path& dir, double canvas = 640.0);

}  // namespace resume_ie
