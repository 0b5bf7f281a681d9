// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Document ingestion: letterboxed 640x640 pages for detection, or the embedded
// text layer of born-digital documents.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>

#include "resume_ie/geometry.hpp"

namespace resume_ie {

inline constexpr int kCanvasSize = 640;
inline constexpr int kLetterboxPadValue = 114;
inline constexpr int kDefaultDpi = 150;

struct PageImage {
  cv::Mat pixels;  // CV_8UC3, kCanvasSize x kCanvasSize, BGR
  double scale = 1.0;
  int pad_left = 0;
  int pad_top = 0;
  int source_page = 0;
  int source_width = 0;
  int source_height = 0;
};

struct RawTextBlock {
  std::string text;
  int page = 0;
  std::optional<Box> bbox;
};

enum class DocumentKind { image, pdf, doc, unsupported };

/// Classifies by magic bytes first, extension second.
DocumentKind detect_document_kind(const std::filesystem::path& path);

/// Renders PDF pages to images. Implementations are exclusive-use per worker
/// unless `reentrant()` says otherwise.
class RenderPort {
 public:
  virtual ~RenderPort() = default;
  virtual std::vector<cv::Mat> render(const std::filesystem::path& pdf, int dpi) = 0;
  virtual bool reentrant() const { return false; }
};

/// Extracts embedded text from a word-processing document.
class TextMinerPort {
 public:
  virtual ~TextMinerPort() = default;
  virtual std::vector<RawTextBlock> mine(const std::filesystem::path& document) = 0;
};

/// Aspect-preserving resize onto a grey 640x640 canvas, content centred.
PageImage letterbox(const cv::Mat& page, int source_page = 0);

/// One PageImage per page. Images are read directly; PDFs need `pdf_renderer`.
std::vector<PageImage> rasterize(const std::filesystem::path& document, int dpi = kDefaultDpi,
                                 RenderPort* pdf_renderer = nullptr);

/// Text layer in document order. An empty result means "no text layer, use OCR".
/// PDFs use the built-in miner; DOC files need `doc_miner`.
std::vector<RawTextBlock> mine_text(const std::filesystem::path& document,
                                    TextMinerPort* doc_miner = nullptr);

/// Built-in PDF text-layer miner over raw file bytes: one block per text object.
std::vector<RawTextBlock> mine_pdf_text(std::string_view pdf_bytes);

/// Maps a 640-space box back to source page coordinates, clamped to the page.
Box unletterbox(const Box& box, const PageImage& page);

/// Forward transform, source page coordinates to 640-space.
Box letterbox_box(const Box& box, const PageImage& page);

}  // namespace resume_ie
