// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "resume_ie/error.hpp"
#include "resume_ie/ingest.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

namespace {

std::string deflate(const std::string& data) {
  uLongf size = compressBound(static_cast<uLong>(data.size()));
  std::string out(size, '\0');
  REQUIRE(compress(reinterpret_cast<Bytef*>(out.data()), &size, reinterpret_cast<const Bytef*>(data.data()),
                   static_cast<uLong>(data.size())) == Z_OK);
  out.resize(size);
  return out;
}

// One page per entry of `pages`, each page one content stream.
std::string build_pdf(const std::vector<std::string>& pages, bool flate) {
  std::ostringstream pdf;
  pdf << "%PDF-1.4\n";
  const int n = static_cast<int>(pages.size());
  pdf << "1 0 obj\n<< /Type /Catalog /Pages 2 0 R >>\nendobj\n";
  pdf << "2 0 obj\n<< /Type /Pages /Kids [";
  for (int i = 0; i < n; ++i) pdf << (3 + 2 * i) << " 0 R ";
  pdf << "] /Count " << n << " >>\nendobj\n";
  for (int i = 0; i < n; ++i) {
    pdf << (3 + 2 * i) << " 0 obj\n<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents " << (4 + 2 * i)
        << " 0 R >>\nendobj\n";
    const std::string body = flate ? deflate(pages[static_cast<std::size_t>(i)]) : pages[static_cast<std::size_t>(i)];
    pdf << (4 + 2 * i) << " 0 obj\n<< /Length " << body.size() << (flate ? " /Filter /FlateDecode" : "")
        << " >>\nstream\n"
        << body << "\nendstream\nendobj\n";
  }
  pdf << "trailer\n<< /Root 1 0 R >>\n%%EOF\n";
  return pdf.str();
}

const std::vector<std::string> kBlocks = {"EDUCATION University of Example", "EXPERIENCE Data Analyst",
                                          "SKILLS C++ Python C#", "LANGUAGE Turkish English",
                                          "PERSONAL Istanbul"};

std::string five_block_content() {
  std::string s;
  int y = 700;
  for (const auto& b : kBlocks) {
    s += "BT /F1 10 Tf 40 " + std::to_string(y) + " Td (" + b + ") Tj ET\n";
    y -= 60;
  }
  return s;
}

fs::path write_temp(const std::string& name, const std::string& bytes) {
  const fs::path p = fs::temp_directory_path() / ("resume_ie_ingest_" + name);
  std::ofstream(p, std::ios::binary) << bytes;
  return p;
}

class FakeRenderer final : public RenderPort {
 public:
  std::vector<cv::Mat> render(const fs::path&, int) override {
    return {cv::Mat(100, 80, CV_8UC3, cv::Scalar(255, 255, 255)), cv::Mat(100, 80, CV_8UC3, cv::Scalar(0, 0, 0)),
            cv::Mat(50, 50, CV_8UC3, cv::Scalar(9, 9, 9))};
  }
};

}  // namespace

TEST_CASE("letterbox arithmetic") {
  const auto p = letterbox(cv::Mat(960, 1280, CV_8UC3, cv::Scalar(255, 255, 255)));
  CHECK(p.scale == 0.5);
  CHECK(p.pad_left == 0);
  CHECK(p.pad_top == 80);
  CHECK(p.pixels.rows == kCanvasSize);
  CHECK(p.pixels.cols == kCanvasSize);
  CHECK(p.pixels.at<cv::Vec3b>(10, 10)[0] == kLetterboxPadValue);
  CHECK(p.pixels.at<cv::Vec3b>(320, 320)[0] == 255);

  const auto q = letterbox(cv::Mat(640, 640, CV_8UC3, cv::Scalar(1, 2, 3)));
  CHECK(q.scale == 1.0);
  CHECK(q.pad_left == 0);
  CHECK(q.pad_top == 0);
  CHECK_THROWS_AS(letterbox(cv::Mat()), PreconditionError);
}

TEST_CASE("unletterbox inverts letterbox_box and clamps") {
  const auto p = letterbox(cv::Mat(960, 1280, CV_8UC3, cv::Scalar(255, 255, 255)));
  CHECK(unletterbox(Box{0, 80, 640, 560}, p) == Box{0, 0, 1280, 960});
  CHECK(unletterbox(Box{0, 0, 640, 640}, p) == Box{0, 0, 1280, 960});
  const Box b{100, 200, 300, 400};
  CHECK(unletterbox(letterbox_box(b, p), p) == b);

  const auto id = letterbox(cv::Mat(640, 640, CV_8UC3, cv::Scalar(0, 0, 0)));
  CHECK(unletterbox(Box{1, 2, 3, 4}, id) == Box{1, 2, 3, 4});
}

TEST_CASE("document kind by magic bytes") {
  const auto pdf = write_temp("kind.bin", "%PDF-1.4\n");
  CHECK(detect_document_kind(pdf) == DocumentKind::pdf);
  const auto doc = write_temp("kind.doc", "\xD0\xCF\x11\xE0....");
  CHECK(detect_document_kind(doc) == DocumentKind::doc);
  const auto txt = write_temp("kind.txt", "hello");
  CHECK(detect_document_kind(txt) == DocumentKind::unsupported);
  CHECK(detect_document_kind(fs::path(RESUME_IE_FIXTURE_DIR) / "resume.png") == DocumentKind::image);
  CHECK_THROWS_AS(rasterize(txt), PreconditionError);
  fs::remove(pdf);
  fs::remove(doc);
  fs::remove(txt);
}

TEST_CASE("rasterize images and PDFs") {
  const auto png = fs::path(RESUME_IE_FIXTURE_DIR) / "resume.png";
  const auto a = rasterize(png);
  const auto b = rasterize(png);
  REQUIRE(a.size() == 1);
  CHECK(cv::norm(a[0].pixels, b[0].pixels, cv::NORM_INF) == 0.0);

  const auto pdf = write_temp("three.pdf", build_pdf({"", "", ""}, false));
  CHECK_THROWS_AS(rasterize(pdf), PortError);
  FakeRenderer renderer;
  const auto pages = rasterize(pdf, kDefaultDpi, &renderer);
  REQUIRE(pages.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(pages[static_cast<std::size_t>(i)].source_page == i);
  fs::remove(pdf);

  const auto corrupt = write_temp("corrupt.png", "\x89PNG garbage");
  CHECK_THROWS(rasterize(corrupt));
  fs::remove(corrupt);
}

TEST_CASE("PDF text layer: five blocks in order") {
  for (bool flate : {false, true}) {
    CAPTURE(flate);
    const auto blocks = mine_pdf_text(build_pdf({five_block_content()}, flate));
    REQUIRE(blocks.size() == kBlocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      CHECK(blocks[i].text == kBlocks[i]);
      CHECK(blocks[i].page == 0);
    }
  }
}

TEST_CASE("PDF text layer: pages, TJ arrays and scanned pages") {
  const auto blocks = mine_pdf_text(build_pdf({"BT (first) Tj ET", "BT [(sec) -50 (ond)] TJ ET"}, true));
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].page == 0);
  CHECK(blocks[1].page == 1);
  CHECK(blocks[1].text == "second");

  CHECK(mine_pdf_text(build_pdf({"q 100 0 0 100 0 0 cm /Im1 Do Q"}, true)).empty());
  CHECK_THROWS_AS(mine_pdf_text("not a pdf"), FormatError);
}

TEST_CASE("mine_text dispatch") {
  CHECK(mine_text(fs::path(RESUME_IE_FIXTURE_DIR) / "resume.pdf").size() == 5);
  CHECK_THROWS_AS(mine_text(fs::path(RESUME_IE_FIXTURE_DIR) / "resume.png"), PreconditionError);
  CHECK_THROWS_AS(mine_text("/nonexistent/file.pdf"), Error);
  const auto doc = write_temp("nominer.doc", "\xD0\xCF\x11\xE0....");
  CHECK_THROWS_AS(mine_text(doc), PortError);
  fs::remove(doc);
}
