// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/ocr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace resume_ie {

Charset::Charset(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
  std::set<std::string> seen;
  for (const auto& s : symbols_) {
    if (s.empty()) throw FormatError("charset symbols must be non-empty");
    if (!seen.insert(s).second) throw FormatError("duplicate charset symbol '" + s + "'");
  }
}

Charset Charset::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open charset " + path.string());
  std::vector<std::string> symbols;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": empty charset symbol");
    }
    symbols.push_back(line);
  }
  try {
    return Charset(std::move(symbols));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

const std::string& Charset::symbol(int index) const {
  if (index < 1 || index > size()) {
    throw PreconditionError("charset index out of range: " + std::to_string(index));
  }
  return symbols_[static_cast<std::size_t>(index - 1)];
}

int Charset::index_of(const std::string& symbol) const {
  const auto it = std::find(symbols_.begin(), symbols_.end(), symbol);
  return it == symbols_.end() ? -1 : static_cast<int>(it - symbols_.begin()) + 1;
}

CtcDecoded ctc_greedy_decode(const LogitSeq& logits, const Charset& charset) {
  if (logits.rows() < 1 || logits.cols() != charset.size() + 1) {
    throw PreconditionError("logits must be T x (S+1) with T >= 1");
  }
  CtcDecoded out;
  double conf_sum = 0.0;
  int prev = -1;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    const double top = logits.row(t).maxCoeff(&best);
    const int label = static_cast<int>(best);
    if (label != kCtcBlank && label != prev) {
      const double denom = (logits.row(t).array() - top).exp().sum();
      conf_sum += 1.0 / denom;
      out.labels.push_back(label);
      out.text += charset.symbol(label);
    }
    prev = label;
  }
  if (!out.labels.empty()) out.mean_confidence = conf_sum / static_cast<double>(out.labels.size());
  return out;
}

cv::Mat crop(const PageImage& page, const TextRegion& region, int margin) {
  const Box& b = region.box;
  if (!(b.x2 > b.x1 && b.y2 > b.y1)) throw PreconditionError("cannot crop a zero-area region");
  const int w = page.pixels.cols, h = page.pixels.rows;
  const int x1 = std::clamp(static_cast<int>(std::floor(b.x1)) - margin, 0, w);
  const int y1 = std::clamp(static_cast<int>(std::floor(b.y1)) - margin, 0, h);
  const int x2 = std::clamp(static_cast<int>(std::ceil(b.x2)) + margin, 0, w);
  const int y2 = std::clamp(static_cast<int>(std::ceil(b.y2)) + margin, 0, h);
  if (x2 <= x1 || y2 <= y1) throw PreconditionError("region lies outside the page");
  return page.pixels(cv::Rect(x1, y1, x2 - x1, y2 - y1)).clone();
}

std::vector<OcrResult> recognize(const PageImage& page, const std::vector<TextRegion>& regions,
                                 RecognizerPort& port, int margin) {
  std::vector<TextRegion> ordered = regions;
  const bool all_ordered = std::all_of(ordered.begin(), ordered.end(),
                                       [](const TextRegion& r) { return r.order_index.has_value(); });
  if (all_ordered) {
    std::stable_sort(ordered.begin(), ordered.end(), [](const TextRegion& a, const TextRegion& b) {
      return *a.order_index < *b.order_index;
    });
  }

  std::vector<OcrResult> results;
  results.reserve(ordered.size());
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const int index = static_cast<int>(i);
    LogitSeq logits;
    try {
      logits = port.infer(crop(page, ordered[i], margin));
    } catch (const std::exception& e) {
      throw RecognitionError(index, e.what());
    }
    CtcDecoded decoded;
    try {
      decoded = ctc_greedy_decode(logits, port.charset());
    } catch (const std::exception& e) {
      throw RecognitionError(index, e.what());
    }
    results.push_back({ordered[i], std::move(decoded.text), decoded.mean_confidence});
  }
  return results;
}

}  // namespace resume_ie
