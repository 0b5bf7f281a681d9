// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used to check the library. Nothing here
// calls the library routine it is compared against.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "resume_ie/classify.hpp"
#include "resume_ie/detect.hpp"
#include "resume_ie/metrics.hpp"
#include "resume_ie/ocr.hpp"

namespace oracle {

// --- classification metrics -------------------------------------------------

struct F1Triple {
  double micro = 0, macro = 0, weighted = 0;
  std::vector<double> per_class;
};

// Counts from the expanded (true, pred) pairs; 0/0 taken as 0.
inline F1Triple f1_from_pairs(const std::vector<std::pair<int, int>>& pairs, int k) {
  F1Triple out;
  double correct = 0;
  for (const auto& [t, p] : pairs) correct += (t == p);
  const double n = static_cast<double>(pairs.size());
  out.micro = n > 0 ? correct / n : 0.0;  // single-label: pooled P = pooled R = accuracy
  for (int c = 0; c < k; ++c) {
    double tp = 0, pred_c = 0, true_c = 0;
    for (const auto& [t, p] : pairs) {
      if (p == c) ++pred_c;
      if (t == c) ++true_c;
      if (t == c && p == c) ++tp;
    }
    const double prec = pred_c > 0 ? tp / pred_c : 0.0;
    const double rec = true_c > 0 ? tp / true_c : 0.0;
    const double f1 = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    out.per_class.push_back(f1);
    out.macro += f1 / k;
    out.weighted += n > 0 ? f1 * true_c / n : 0.0;
  }
  return out;
}

// --- boxes ------------------------------------------------------------------

inline double box_iou(const resume_ie::Box& a, const resume_ie::Box& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

// Repeatedly takes the best remaining region (earliest on score ties) and
// removes every same-class region overlapping it at or above the threshold.
inline std::vector<resume_ie::TextRegion> nms(std::vector<resume_ie::TextRegion> pool, double thr) {
  std::vector<resume_ie::TextRegion> kept;
  while (!pool.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i)
      if (pool[i].score > pool[best].score) best = i;
    const auto winner = pool[best];
    kept.push_back(winner);
    std::vector<resume_ie::TextRegion> rest;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (i == best) continue;
      if (pool[i].class_id == winner.class_id && box_iou(pool[i].box, winner.box) >= thr) continue;
      rest.push_back(pool[i]);
    }
    pool = std::move(rest);
  }
  return kept;
}

// All-points AP: rank, match each prediction to the unmatched same-image ground
// truth with the largest IoU (lowest index on ties), then integrate
// sum_k (r_k - r_{k-1}) * max_{j >= k} p_j over the ranked list.
inline double average_precision(const std::vector<resume_ie::ScoredBox>& preds,
                                const std::vector<resume_ie::GroundTruthBox>& gts, double thr) {
  if (gts.empty()) return 0.0;
  std::vector<std::size_t> rank(preds.size());
  for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
  std::sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    if (preds[a].score != preds[b].score) return preds[a].score > preds[b].score;
    return a < b;
  });
  std::vector<char> taken(gts.size(), 0);
  std::vector<double> prec, rec;
  double tp = 0;
  for (std::size_t k = 0; k < rank.size(); ++k) {
    const auto& p = preds[rank[k]];
    std::vector<std::pair<double, std::size_t>> cands;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].image_id != p.image_id) continue;
      const double v = box_iou(p.box, gts[g].box);
      if (v >= thr) cands.emplace_back(-v, g);
    }
    if (!cands.empty()) {
      std::sort(cands.begin(), cands.end());
      taken[cands.front().second] = 1;
      ++tp;
    }
    prec.push_back(tp / static_cast<double>(k + 1));
    rec.push_back(tp / static_cast<double>(gts.size()));
  }
  double ap = 0, prev_r = 0;
  for (std::size_t k = 0; k < prec.size(); ++k) {
    double env = 0;
    for (std::size_t j = k; j < prec.size(); ++j) env = std::max(env, prec[j]);
    ap += (rec[k] - prev_r) * env;
    prev_r = rec[k];
  }
  return ap;
}

// --- CTC --------------------------------------------------------------------

inline std::vector<int> best_path(const Eigen::MatrixXd& logits) {
  std::vector<int> path;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    int arg = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(t, c) > logits(t, arg)) arg = static_cast<int>(c);
    path.push_back(arg);
  }
  return path;
}

inline std::vector<int> collapse(const std::vector<int>& path) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != prev && s != 0) out.push_back(s);
    prev = s;
  }
  return out;
}

// --- unigram ----------------------------------------------------------------

// Maximum total score over every segmentation of `word` into pieces of
// `scores`; -inf when none exists.
inline double best_segmentation_score(const std::u32string& word, const std::map<std::u32string, double>& scores) {
  double best = -INFINITY;
  std::function<void(std::size_t, double)> walk = [&](std::size_t pos, double acc) {
    if (pos == word.size()) {
      best = std::max(best, acc);
      return;
    }
    for (std::size_t len = 1; pos + len <= word.size(); ++len) {
      const auto it = scores.find(word.substr(pos, len));
      if (it != scores.end()) walk(pos + len, acc + it->second);
    }
  };
  walk(0, 0.0);
  return best;
}

// --- gradients --------------------------------------------------------------

// Weighted CE of the head on a batch with fixed dropout masks, in long double.
inline long double head_loss(const resume_ie::BasicClassifierHead<long double>& head,
                             const Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>& x,
                             const std::vector<int>& y, const std::vector<double>& w,
                             const resume_ie::DropoutMasks<long double>& masks) {
  using M = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  M xd = x.cwiseProduct(masks.input);
  M h = ((head.w1 * xd).colwise() + head.b1).cwiseMax(0.0L).cwiseProduct(masks.hidden);
  M z = (head.w2 * h).colwise() + head.b2;
  long double num = 0, den = 0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    long double mx = z.col(j).maxCoeff();
    long double lse = 0;
    for (Eigen::Index c = 0; c < z.rows(); ++c) lse += std::exp(z(c, j) - mx);
    lse = mx + std::log(lse);
    const long double wy = w[static_cast<std::size_t>(y[static_cast<std::size_t>(j)])];
    num += wy * (lse - z(y[static_cast<std::size_t>(j)], j));
    den += wy;
  }
  return num / den;
}

// --- splits -----------------------------------------------------------------

// Largest remainder for ratios given in hundredths, exact integer arithmetic.
inline std::vector<std::size_t> apportion_percent(std::size_t n, const std::vector<int>& pct) {
  std::vector<std::size_t> out;
  std::vector<std::pair<long long, std::size_t>> rem;  // (-remainder, bucket)
  std::size_t used = 0;
  for (std::size_t i = 0; i < pct.size(); ++i) {
    const long long q = static_cast<long long>(n) * pct[i];
    out.push_back(static_cast<std::size_t>(q / 100));
    used += out.back();
    rem.emplace_back(-(q % 100), i);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t i = 0; used < n; ++i, ++used) ++out[rem[i].second];
  return out;
}

}  // namespace oracle
