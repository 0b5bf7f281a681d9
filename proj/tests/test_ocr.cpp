// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "resume_ie/error.hpp"
#include "resume_ie/ocr.hpp"
#include "resume_ie/reference_ports.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

namespace {

PageImage blank_page() { return letterbox(cv::Mat(640, 640, CV_8UC3, cv::Scalar(255, 255, 255))); }

TextRegion region(Box b) {
  TextRegion r;
  r.box = b;
  r.score = 1.0;
  return r;
}

class FailingOn final : public RecognizerPort {
 public:
  FailingOn(int bad, Charset cs) : bad_(bad), cs_(std::move(cs)) {}
  LogitSeq infer(const cv::Mat&) override {
    if (calls_++ == bad_) throw std::runtime_error("bad crop");
    return logits_for_path({1}, cs_.size());
  }
  const Charset& charset() const override { return cs_; }

 private:
  int bad_;
  int calls_ = 0;
  Charset cs_;
};

}  // namespace

TEST_CASE("charset loading") {
  const fs::path p = fs::temp_directory_path() / "resume_ie_charset.txt";
  std::ofstream(p, std::ios::binary) << "a\r\n \nb\n";
  const auto cs = Charset::load(p);
  CHECK(cs.size() == 3);
  CHECK(cs.symbol(1) == "a");
  CHECK(cs.symbol(2) == " ");
  CHECK(cs.index_of("b") == 3);
  CHECK(cs.index_of("z") == -1);
  fs::remove(p);
}

TEST_CASE("greedy CTC examples") {
  const Charset cs({"a", "b"});
  const auto d = ctc_greedy_decode(logits_for_path({1, 1, 0, 2, 2, 0, 1}, 2), cs);
  CHECK(d.text == "aba");
  CHECK(d.labels == std::vector<int>{1, 2, 1});
  const double p = std::exp(10.0) / (std::exp(10.0) + 2.0);
  CHECK(d.mean_confidence == doctest::Approx(p));

  const auto blank = ctc_greedy_decode(logits_for_path({0, 0, 0}, 2), cs);
  CHECK(blank.text.empty());
  CHECK(blank.mean_confidence == 0.0);

  LogitSeq tie = LogitSeq::Zero(2, 3);
  CHECK(ctc_greedy_decode(tie, cs).text.empty());  // ties go to the blank
}

TEST_CASE("crop geometry") {
  const auto page = blank_page();
  const auto c = crop(page, region({10, 10, 20, 20}), 0);
  CHECK(c.cols == 10);
  CHECK(c.rows == 10);
  const auto corner = crop(page, region({0, 0, 5, 5}), 2);
  CHECK(corner.cols == 7);
  CHECK(corner.rows == 7);
  CHECK_THROWS_AS(crop(page, region({5, 5, 5, 9}), 2), PreconditionError);
}

TEST_CASE("recognize with a fixed port") {
  const auto cs = Charset::load(fs::path(RESUME_IE_FIXTURE_DIR) / "charset.txt");
  FixedRecognizer port(cs, "skills");
  const auto page = blank_page();
  auto r = region({10, 10, 100, 30});
  r.order_index = 0;
  const auto out = recognize(page, {r}, port);
  REQUIRE(out.size() == 1);
  CHECK(out[0].text == "skills");
  CHECK(recognize(page, {}, port).empty());
}

TEST_CASE("recognize names the failing region") {
  const Charset cs({"a"});
  FailingOn port(3, cs);
  std::vector<TextRegion> rs;
  for (int i = 0; i < 5; ++i) rs.push_back(region({10.0 * i, 10, 10.0 * i + 8, 20}));
  try {
    recognize(blank_page(), rs, port);
    FAIL("expected RecognitionError");
  } catch (const RecognitionError& e) {
    CHECK(e.region_index() == 3);
  }
}
