// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/reference_ports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "resume_ie/error.hpp"
#include "resume_ie/seeding.hpp"
#include "resume_ie/utf8.hpp"

namespace resume_ie {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_ink(std::uint8_t v) { return v < kStripeInkLimit && (v & 1u); }

int parse_int(const ModelDescriptor& d, const std::string& key, int fallback) {
  const std::string v = d.get(key);
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw FormatError(d.path.string() + ": '" + key + "' is not an integer");
  }
}

double parse_double(const ModelDescriptor& d, const std::string& key, double fallback) {
  const std::string v = d.get(key);
  if (v.empty()) return fallback;
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw FormatError(d.path.string() + ": '" + key + "' is not a number");
  }
}

cv::Mat to_gray(const cv::Mat& img) {
  if (img.empty()) return {};
  cv::Mat gray;
  if (img.channels() == 3) {
    // channel 0 carries the code; fixture pages are neutral gray
    cv::extractChannel(img, gray, 0);
  } else if (img.channels() == 1) {
    gray = img;
  } else {
    throw PortError("stripe ports expect 1 or 3 channel images");
  }
  if (gray.depth() != CV_8U) throw PortError("stripe ports expect 8-bit images");
  return gray;
}

}  // namespace

// --- descriptors ------------------------------------------------------------

std::string ModelDescriptor::kind() const { return get("kind"); }

std::string ModelDescriptor::get(const std::string& key, const std::string& fallback) const {
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    if (it->first == key) return it->second;
  }
  return fallback;
}

std::vector<std::string> ModelDescriptor::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

std::filesystem::path ModelDescriptor::path_of(const std::string& key) const {
  const std::string v = get(key);
  if (v.empty()) throw FormatError(path.string() + ": missing '" + key + "'");
  std::filesystem::path p(v);
  return p.is_absolute() ? p : path.parent_path() / p;
}

ModelDescriptor load_model_descriptor(const std::filesystem::path& path) {
  if (path.extension() == ".onnx") {
    throw PortError(path.string() +
                    ": interchange-format networks need an inference runtime, which this build does not include");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  ModelDescriptor d;
  d.path = path;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.find('\0') != std::string::npos) {
      throw PortError(path.string() + ": binary model file; no inference runtime for it in this build");
    }
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    d.entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  if (d.kind().empty()) throw FormatError(path.string() + ": missing 'kind'");
  return d;
}

// --- detector ---------------------------------------------------------------

DetTensor StripeDetector::infer(const PageImage& page) {
  const cv::Mat gray = to_gray(page.pixels);
  if (gray.empty()) return DetTensor(0, 5);
  cv::Mat ink(gray.size(), CV_8U, cv::Scalar(0));
  for (int y = 0; y < gray.rows; ++y) {
    const auto* src = gray.ptr<std::uint8_t>(y);
    auto* dst = ink.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) dst[x] = is_ink(src[x]) ? 255 : 0;
  }
  cv::Mat grown;
  cv::dilate(ink, grown, cv::getStructuringElement(cv::MORPH_RECT, cv::Size(dilate_, dilate_)));
  cv::Mat labels;
  const int n = cv::connectedComponents(grown, labels, 8, CV_32S);

  // ink extent per component
  std::vector<std::array<int, 4>> ext(static_cast<std::size_t>(n), {gray.cols, gray.rows, -1, -1});
  std::vector<int> area(static_cast<std::size_t>(n), 0);
  for (int y = 0; y < gray.rows; ++y) {
    const auto* m = ink.ptr<std::uint8_t>(y);
    const auto* l = labels.ptr<int>(y);
    for (int x = 0; x < gray.cols; ++x) {
      if (!m[x] || l[x] == 0) continue;
      auto& e = ext[static_cast<std::size_t>(l[x])];
      e[0] = std::min(e[0], x);
      e[1] = std::min(e[1], y);
      e[2] = std::max(e[2], x + 1);
      e[3] = std::max(e[3], y + 1);
      ++area[static_cast<std::size_t>(l[x])];
    }
  }
  std::vector<std::array<double, 5>> rows;
  for (int c = 1; c < n; ++c) {
    const auto& e = ext[static_cast<std::size_t>(c)];
    if (area[static_cast<std::size_t>(c)] < min_area_ || e[2] < 0) continue;
    const double w = e[2] - e[0], h = e[3] - e[1];
    rows.push_back({e[0] + w / 2, e[1] + h / 2, w, h, score_});
  }
  DetTensor t(static_cast<Eigen::Index>(rows.size()), 5);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < 5; ++j) t(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return t;
}

// --- recognizer -------------------------------------------------------------

LogitSeq logits_for_path(const std::vector<int>& path, int num_symbols, double high) {
  LogitSeq out = LogitSeq::Zero(std::max<Eigen::Index>(1, static_cast<Eigen::Index>(path.size())), num_symbols + 1);
  if (path.empty()) {
    out(0, kCtcBlank) = high;
    return out;
  }
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] < 0 || path[t] > num_symbols) throw PreconditionError("label outside the charset");
    out(static_cast<Eigen::Index>(t), path[t]) = high;
  }
  return out;
}

std::vector<int> path_for_text(const std::string& text, const Charset& charset) {
  std::vector<int> path;
  for (char32_t cp : utf8::decode(text)) {
    const int idx = charset.index_of(utf8::encode(cp));
    if (idx < 1) throw PreconditionError("character '" + utf8::encode(cp) + "' is not in the charset");
    if (!path.empty() && path.back() == idx) path.push_back(kCtcBlank);
    path.push_back(idx);
  }
  return path;
}

FixedRecognizer::FixedRecognizer(Charset charset, std::string text)
    : charset_(std::move(charset)), logits_(logits_for_path(path_for_text(text, charset_), charset_.size())) {}

LogitSeq StripeRecognizer::infer(const cv::Mat& crop_img) {
  const cv::Mat gray = to_gray(crop_img);
  const int space = charset_.index_of(" ");
  std::vector<int> path;
  if (!gray.empty()) {
    std::vector<bool> row_ink(static_cast<std::size_t>(gray.rows), false);
    for (int y = 0; y < gray.rows; ++y) {
      const auto* p = gray.ptr<std::uint8_t>(y);
      row_ink[static_cast<std::size_t>(y)] = std::any_of(p, p + gray.cols, is_ink);
    }
    bool first_band = true;
    for (int y = 0; y < gray.rows;) {
      if (!row_ink[static_cast<std::size_t>(y)]) {
        ++y;
        continue;
      }
      int y_end = y;
      while (y_end < gray.rows && row_ink[static_cast<std::size_t>(y_end)]) ++y_end;
      if (!first_band) {
        if (space > 0) path.push_back(space);
        path.push_back(kCtcBlank);
      }
      first_band = false;
      for (int x = 0; x < gray.cols; ++x) {
        int label = kCtcBlank;
        for (int yy = y; yy < y_end; ++yy) {
          const std::uint8_t v = gray.at<std::uint8_t>(yy, x);
          if (is_ink(v)) {
            const int idx = (v - 1) / 2;
            if (idx >= 1 && idx <= charset_.size()) label = idx;
            break;
          }
        }
        path.push_back(label);
      }
      y = y_end;
    }
  }
  return logits_for_path(path, charset_.size());
}

// --- embedding --------------------------------------------------------------

HashedBagEmbedding::HashedBagEmbedding(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 1) throw PreconditionError("embedding width must be positive");
}

Eigen::VectorXd HashedBagEmbedding::token_vector(int id) const {
  std::mt19937_64 rng(derive_seed(seed_, "token", static_cast<std::uint64_t>(static_cast<std::uint32_t>(id))));
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(dim_);
  for (int i = 0; i < dim_; ++i) v(i) = g(rng);
  return v;
}

Eigen::MatrixXd HashedBagEmbedding::hidden_states(const TokenSequence& seq) {
  Eigen::MatrixXd e(kMaxSequenceLength, dim_);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim_);
  int count = 0;
  for (int i = 0; i < kMaxSequenceLength; ++i) {
    e.row(i) = token_vector(seq.ids[static_cast<std::size_t>(i)]).transpose();
    if (seq.mask[static_cast<std::size_t>(i)]) {
      mean += e.row(i).transpose();
      ++count;
    }
  }
  if (count > 0) mean /= static_cast<double>(count);
  Eigen::MatrixXd out(kMaxSequenceLength, dim_);
  for (int i = 0; i < kMaxSequenceLength; ++i) {
    if (seq.mask[static_cast<std::size_t>(i)]) {
      out.row(i) = (e.row(i) + mean.transpose()).array().tanh().matrix();
    } else {
      out.row(i) = e.row(i).array().tanh().matrix();
    }
  }
  return out;
}

// --- factories --------------------------------------------------------------

std::unique_ptr<DetectorPort> load_detector(const std::filesystem::path& descriptor) {
  const ModelDescriptor d = load_model_descriptor(descriptor);
  if (d.kind() == "stripe_detector") {
    return std::make_unique<StripeDetector>(parse_int(d, "dilate", 11), parse_double(d, "score", 0.9),
                                            parse_int(d, "min_area", 4));
  }
  if (d.kind() == "fixed_detector") {
    const auto rows = d.all("row");
    std::vector<std::vector<double>> parsed;
    std::size_t width = 0;
    for (const auto& r : rows) {
      std::istringstream ss(r);
      std::vector<double> vals;
      for (double v; ss >> v;) vals.push_back(v);
      if (vals.size() < 5 || !ss.eof()) throw FormatError(descriptor.string() + ": bad detector row '" + r + "'");
      if (width != 0 && vals.size() != width) throw FormatError(descriptor.string() + ": ragged detector rows");
      width = vals.size();
      parsed.push_back(std::move(vals));
    }
    DetTensor t(static_cast<Eigen::Index>(parsed.size()), static_cast<Eigen::Index>(width ? width : 5));
    for (std::size_t i = 0; i < parsed.size(); ++i)
      for (std::size_t j = 0; j < width; ++j) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parsed[i][j];
    return std::make_unique<FixedDetector>(std::move(t));
  }
  throw PortError(descriptor.string() + ": unknown detector kind '" + d.kind() + "'");
}

std::unique_ptr<RecognizerPort> load_recognizer(const std::filesystem::path& descriptor) {
  const ModelDescriptor d = load_model_descriptor(descriptor);
  if (d.kind() == "stripe_recognizer") return std::make_unique<StripeRecognizer>(Charset::load(d.path_of("charset")));
  if (d.kind() == "fixed_recognizer") {
    return std::make_unique<FixedRecognizer>(Charset::load(d.path_of("charset")), d.get("text"));
  }
  throw PortError(descriptor.string() + ": unknown recognizer kind '" + d.kind() + "'");
}

std::unique_ptr<EmbeddingPort> load_embedding(const std::filesystem::path& descriptor) {
  const ModelDescriptor d = load_model_descriptor(descriptor);
  if (d.kind() == "hashed_bag") {
    const int dim = parse_int(d, "dim", 32);
    const std::string seed = d.get("seed", "0");
    try {
      return std::make_unique<HashedBagEmbedding>(dim, std::stoull(seed));
    } catch (const std::logic_error&) {
      throw FormatError(descriptor.string() + ": 'seed' is not an unsigned integer");
    }
  }
  throw PortError(descriptor.string() + ": unknown backbone kind '" + d.kind() + "'");
}

// --- stripe rendering -------------------------------------------------------

std::vector<std::string> wrap_words(const std::string& text, std::size_t max_chars) {
  std::vector<std::string> lines;
  std::string cur;
  std::size_t cur_len = 0;
  for (const auto& w : utf8::split_whitespace(text)) {
    const std::size_t wl = utf8::decode(w).size();
    if (cur_len > 0 && cur_len + 1 + wl > max_chars) {
      lines.push_back(cur);
      cur.clear();
      cur_len = 0;
    }
    if (cur_len > 0) {
      cur += ' ';
      ++cur_len;
    }
    cur += w;
    cur_len += wl;
  }
  if (cur_len > 0) lines.push_back(cur);
  return lines;
}

Box stripe_block_extent(const StripeBlock& block) {
  const auto lines = wrap_words(block.text, block.max_chars);
  std::size_t widest = 0;
  for (const auto& l : lines) widest = std::max(widest, utf8::decode(l).size());
  const int pitch = kStripeCharWidth + kStripeCharGap;
  const double w = widest ? static_cast<double>(widest) * pitch - kStripeCharGap : 0.0;
  const double h = lines.empty() ? 0.0
                                 : static_cast<double>(lines.size()) * (kStripeLineHeight + kStripeLineGap) -
                                       kStripeLineGap;
  return {double(block.x), double(block.y), block.x + w, block.y + h};
}

cv::Mat render_stripe_page(const std::vector<StripeBlock>& blocks, const Charset& charset, int width, int height) {
  cv::Mat page(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
  const int pitch = kStripeCharWidth + kStripeCharGap;
  for (const auto& b : blocks) {
    int y = b.y;
    for (const auto& line : wrap_words(b.text, b.max_chars)) {
      int x = b.x;
      for (char32_t cp : utf8::decode(line)) {
        const std::string sym = utf8::encode(cp);
        const int idx = charset.index_of(sym);
        if (idx < 1) throw PreconditionError("character '" + sym + "' is not in the charset");
        const int level = 2 * idx + 1;
        if (level >= kStripeInkLimit) throw PreconditionError("charset index too large for stripe coding");
        const cv::Rect r(x, y, kStripeCharWidth, kStripeLineHeight);
        if ((r & cv::Rect(0, 0, width, height)) != r) throw PreconditionError("stripe block leaves the page");
        page(r).setTo(cv::Scalar(level, level, level));
        x += pitch;
      }
      y += kStripeLineHeight + kStripeLineGap;
    }
  }
  return page;
}

}  // namespace resume_ie
