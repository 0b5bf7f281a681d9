// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "resume_ie/error.hpp"

namespace resume_ie {

namespace {

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

DocumentKind detect_document_kind(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::array<char, 8> head{};
  in.read(head.data(), head.size());
  const std::string_view magic(head.data(), static_cast<std::size_t>(in.gcount()));

  if (starts_with(magic, "%PDF")) return DocumentKind::pdf;
  if (starts_with(magic, "\x89PNG")) return DocumentKind::image;
  if (starts_with(magic, "\xFF\xD8\xFF")) return DocumentKind::image;
  if (starts_with(magic, "\xD0\xCF\x11\xE0")) return DocumentKind::doc;  // OLE2 compound file

  const std::string ext = lower_extension(path);
  if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") return DocumentKind::image;
  if (ext == ".pdf") return DocumentKind::pdf;
  if (ext == ".doc") return DocumentKind::doc;
  return DocumentKind::unsupported;
}

PageImage letterbox(const cv::Mat& page, int source_page) {
  if (page.empty() || page.type() != CV_8UC3) {
    throw PreconditionError("letterbox expects a non-empty 8-bit BGR image");
  }
  PageImage out;
  out.source_page = source_page;
  out.source_width = page.cols;
  out.source_height = page.rows;
  out.scale = std::min(static_cast<double>(kCanvasSize) / page.cols,
                       static_cast<double>(kCanvasSize) / page.rows);
  const int w = std::clamp(static_cast<int>(std::lround(page.cols * out.scale)), 1, kCanvasSize);
  const int h = std::clamp(static_cast<int>(std::lround(page.rows * out.scale)), 1, kCanvasSize);
  out.pad_left = (kCanvasSize - w) / 2;
  out.pad_top = (kCanvasSize - h) / 2;

  cv::Mat resized;
  if (w == page.cols && h == page.rows) {
    resized = page;
  } else {
    const int interp = out.scale < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR;
    cv::resize(page, resized, cv::Size(w, h), 0, 0, interp);
  }
  out.pixels = cv::Mat(kCanvasSize, kCanvasSize, CV_8UC3, cv::Scalar::all(kLetterboxPadValue));
  resized.copyTo(out.pixels(cv::Rect(out.pad_left, out.pad_top, w, h)));
  return out;
}

std::vector<PageImage> rasterize(const std::filesystem::path& document, int dpi,
                                 RenderPort* pdf_renderer) {
  if (dpi <= 0) throw PreconditionError("dpi must be positive");
  std::vector<PageImage> pages;
  switch (detect_document_kind(document)) {
    case DocumentKind::image: {
      cv::Mat img = cv::imread(document.string(), cv::IMREAD_COLOR);
      if (img.empty()) throw FormatError("cannot decode image " + document.string());
      pages.push_back(letterbox(img, 0));
      break;
    }
    case DocumentKind::pdf: {
      if (!pdf_renderer) {
        throw PortError("PDF rasterization needs a renderer port: " + document.string());
      }
      const auto rendered = pdf_renderer->render(document, dpi);
      for (std::size_t i = 0; i < rendered.size(); ++i) {
        pages.push_back(letterbox(rendered[i], static_cast<int>(i)));
      }
      break;
    }
    case DocumentKind::doc:
      throw PreconditionError("DOC files are handled by text mining only: " + document.string());
    case DocumentKind::unsupported:
      throw PreconditionError("unsupported document type: " + document.string());
  }
  return pages;
}

std::vector<RawTextBlock> mine_text(const std::filesystem::path& document,
                                    TextMinerPort* doc_miner) {
  switch (detect_document_kind(document)) {
    case DocumentKind::pdf:
      return mine_pdf_text(read_bytes(document));
    case DocumentKind::doc:
      if (!doc_miner) throw PortError("no DOC text miner configured for " + document.string());
      return doc_miner->mine(document);
    case DocumentKind::image:
      throw PreconditionError("images have no text layer: " + document.string());
    case DocumentKind::unsupported:
      break;
  }
  throw PreconditionError("unsupported document type: " + document.string());
}

Box unletterbox(const Box& box, const PageImage& page) {
  const double w = page.source_width;
  const double h = page.source_height;
  auto map_x = [&](double x) { return std::clamp((x - page.pad_left) / page.scale, 0.0, w); };
  auto map_y = [&](double y) { return std::clamp((y - page.pad_top) / page.scale, 0.0, h); };
  return {map_x(box.x1), map_y(box.y1), map_x(box.x2), map_y(box.y2)};
}

Box letterbox_box(const Box& box, const PageImage& page) {
  return {box.x1 * page.scale + page.pad_left, box.y1 * page.scale + page.pad_top,
          box.x2 * page.scale + page.pad_left, box.y2 * page.scale + page.pad_top};
}

}  // namespace resume_ie
