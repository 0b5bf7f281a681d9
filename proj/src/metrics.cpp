// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "resume_ie/error.hpp"

namespace resume_ie {

namespace {

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) { return safe_div(2.0 * p * r, p + r); }

}  // namespace

ConfusionMatrix confusion(const std::vector<int>& labels_true, const std::vector<int>& labels_pred,
                          int num_classes) {
  if (labels_true.size() != labels_pred.size()) {
    throw PreconditionError("confusion: label vectors differ in length (" +
                            std::to_string(labels_true.size()) + " vs " +
                            std::to_string(labels_pred.size()) + ")");
  }
  if (num_classes <= 0) throw PreconditionError("confusion: num_classes must be positive");
  ConfusionMatrix cm = ConfusionMatrix::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < labels_true.size(); ++i) {
    const int t = labels_true[i], p = labels_pred[i];
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw PreconditionError("confusion: label out of range at index " + std::to_string(i));
    }
    ++cm(t, p);
  }
  return cm;
}

F1Report f1_report(const ConfusionMatrix& cm) {
  if (cm.rows() != cm.cols() || cm.rows() == 0) throw PreconditionError("f1_report: matrix must be square");
  if ((cm.array() < 0).any()) throw PreconditionError("f1_report: negative count");
  const std::int64_t total = cm.sum();
  if (total == 0) throw PreconditionError("f1_report: empty confusion matrix");

  const Eigen::Index k = cm.rows();
  F1Report rep;
  rep.per_class.resize(static_cast<std::size_t>(k));
  std::int64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double macro = 0.0, weighted = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) {
    const std::int64_t tp = cm(c, c);
    const std::int64_t fp = cm.col(c).sum() - tp;
    const std::int64_t fn = cm.row(c).sum() - tp;
    auto& s = rep.per_class[static_cast<std::size_t>(c)];
    s.precision = safe_div(static_cast<double>(tp), static_cast<double>(tp + fp));
    s.recall = safe_div(static_cast<double>(tp), static_cast<double>(tp + fn));
    s.f1 = f1_of(s.precision, s.recall);
    s.support = tp + fn;
    tp_sum += tp;
    fp_sum += fp;
    fn_sum += fn;
    macro += s.f1;
    weighted += s.f1 * static_cast<double>(s.support);
  }
  const double micro_p = safe_div(static_cast<double>(tp_sum), static_cast<double>(tp_sum + fp_sum));
  const double micro_r = safe_div(static_cast<double>(tp_sum), static_cast<double>(tp_sum + fn_sum));
  rep.micro = f1_of(micro_p, micro_r);
  rep.macro = macro / static_cast<double>(k);
  rep.weighted = weighted / static_cast<double>(total);
  return rep;
}

double average_precision(const std::vector<ScoredBox>& preds, const std::vector<GroundTruthBox>& gts,
                         double iou_threshold) {
  if (gts.empty()) return 0.0;

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) by_image[gts[g].image_id].push_back(g);

  std::vector<bool> used(gts.size(), false);
  std::vector<double> precision;
  std::vector<bool> is_tp;
  precision.reserve(order.size());
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& p = preds[order[rank]];
    std::ptrdiff_t best = -1;
    double best_iou = -1.0;
    if (const auto it = by_image.find(p.image_id); it != by_image.end()) {
      for (std::size_t g : it->second) {
        if (used[g]) continue;
        const double v = iou(p.box, gts[g].box);
        if (v >= iou_threshold && v > best_iou) {
          best_iou = v;
          best = static_cast<std::ptrdiff_t>(g);
        }
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      ++tp;
    }
    is_tp.push_back(best >= 0);
    precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
  }

  // monotone envelope, right to left
  for (std::size_t i = precision.size(); i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double ap = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    if (is_tp[i]) ap += precision[i];
  }
  return ap / static_cast<double>(gts.size());
}

std::array<double, 10> coco_iou_thresholds() {
  std::array<double, 10> t{};
  for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = 0.50 + 0.05 * i;
  return t;
}

DetectionEval map_eval(const std::vector<std::string>& image_ids, const std::vector<ScoredBox>& preds,
                       const std::vector<GroundTruthBox>& gts) {
  const std::set<std::string> known(image_ids.begin(), image_ids.end());
  for (const auto& p : preds) {
    if (!known.count(p.image_id)) throw PreconditionError("prediction on unknown image id '" + p.image_id + "'");
  }
  for (const auto& g : gts) {
    if (!known.count(g.image_id)) throw PreconditionError("ground truth on unknown image id '" + g.image_id + "'");
  }

  std::set<int> classes;
  for (const auto& g : gts) classes.insert(g.class_id);

  DetectionEval out;
  const auto thresholds = coco_iou_thresholds();
  double sum50 = 0.0, sum_all = 0.0;
  for (int c : classes) {
    std::vector<ScoredBox> cp;
    std::vector<GroundTruthBox> cg;
    for (const auto& p : preds)
      if (p.class_id == c) cp.push_back(p);
    for (const auto& g : gts)
      if (g.class_id == c) cg.push_back(g);
    std::array<double, 10> ap{};
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      ap[t] = average_precision(cp, cg, thresholds[t]);
      sum_all += ap[t];
    }
    sum50 += ap[0];
    out.class_ids.push_back(c);
    out.ap.push_back(ap);
  }
  if (!classes.empty()) {
    out.map50 = sum50 / static_cast<double>(classes.size());
    out.map50_95 = sum_all / static_cast<double>(classes.size() * thresholds.size());
  }
  return out;
}

std::vector<ScoredBox> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<ScoredBox> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    ScoredBox b;
    std::string extra;
    if (!(ss >> b.image_id >> b.class_id >> b.score >> b.box.x1 >> b.box.y1 >> b.box.x2 >> b.box.y2) ||
        (ss >> extra)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'image_id class score x1 y1 x2 y2'");
    }
    out.push_back(std::move(b));
  }
  return out;
}

void save_predictions(const std::filesystem::path& path, const std::vector<ScoredBox>& preds) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(10);
  for (const auto& p : preds) {
    out << p.image_id << ' ' << p.class_id << ' ' << p.score << ' ' << p.box.x1 << ' ' << p.box.y1 << ' '
        << p.box.x2 << ' ' << p.box.y2 << '\n';
  }
}

std::vector<GroundTruthBox> load_normalized_labels(const std::filesystem::path& path,
                                                   const std::string& image_id, double canvas) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<GroundTruthBox> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    int cls = 0;
    double cx = 0, cy = 0, w = 0, h = 0;
    std::string extra;
    if (!(ss >> cls >> cx >> cy >> w >> h) || (ss >> extra)) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 'class cx cy w h'");
    }
    for (double v : {cx, cy, w, h}) {
      if (v < 0.0 || v > 1.0) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": coordinates must be normalized");
      }
    }
    out.push_back({image_id, cls,
                   Box{(cx - w / 2) * canvas, (cy - h / 2) * canvas, (cx + w / 2) * canvas, (cy + h / 2) * canvas}});
  }
  return out;
}

LabelDirectory load_label_directory(const std::filesystem::path& dir, double canvas) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  LabelDirectory out;
  for (const auto& f : files) {
    const std::string id = f.stem().string();
    out.image_ids.push_back(id);
    for (auto& b : load_normalized_labels(f, id, canvas)) out.boxes.push_back(std::move(b));
  }
  return out;
}

}  // namespace resume_ie
