// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "resume_ie/error.hpp"
#include "resume_ie/reference_ports.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

namespace {

const fs::path kFixtures = RESUME_IE_FIXTURE_DIR;

fs::path write_temp(const std::string& name, const std::string& contents) {
  const fs::path dir = fs::temp_directory_path() / "resume_ie_ports";
  fs::create_directories(dir);
  std::ofstream(dir / name, std::ios::binary) << contents;
  return dir / name;
}

Charset fixture_charset() { return Charset::load(kFixtures / "charset.txt"); }

}  // namespace

TEST_CASE("model descriptors") {
  const auto p = write_temp("d.model", "# comment\nkind = fixed_detector\nrow = 1 2 3 4 0.5\n\nrow = 5 6 7 8 0.9\n");
  const auto d = load_model_descriptor(p);
  CHECK(d.kind() == "fixed_detector");
  CHECK(d.all("row").size() == 2);
  CHECK(d.get("row") == "5 6 7 8 0.9");
  CHECK(d.get("missing", "x") == "x");

  CHECK_THROWS_AS(load_model_descriptor(write_temp("net.onnx", "whatever")), PortError);
  CHECK_THROWS_AS(load_model_descriptor(write_temp("bin.model", std::string("\x08\0\x12", 3))), PortError);
  CHECK_THROWS_AS(load_model_descriptor(write_temp("nokind.model", "dim = 3\n")), FormatError);
  CHECK_THROWS_AS(load_model_descriptor(write_temp("junk.model", "kind = a\nnot a pair\n")), FormatError);
  CHECK_THROWS_AS(load_model_descriptor("/nonexistent/x.model"), Error);
  CHECK_THROWS_AS(load_detector(write_temp("other.model", "kind = yolo\n")), PortError);
}

TEST_CASE("fixed detector from a descriptor") {
  auto det = load_detector(write_temp("fixed.model", "kind = fixed_detector\nrow = 100 100 40 20 0.9\n"));
  const auto page = letterbox(cv::Mat(640, 640, CV_8UC3, cv::Scalar(255, 255, 255)));
  const auto rs = decode(det->infer(page));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].box == Box{80, 90, 120, 110});
  CHECK_THROWS_AS(load_detector(write_temp("ragged.model", "kind = fixed_detector\nrow = 1 2 3 4 5\nrow = 1 2 3 4 5 6\n")),
                  FormatError);
}

TEST_CASE("label paths and logits") {
  const Charset cs({"a", "b"});
  CHECK(path_for_text("aab", cs) == std::vector<int>{1, 0, 1, 2});
  CHECK(ctc_greedy_decode(logits_for_path(path_for_text("aab", cs), cs.size()), cs).text == "aab");
  CHECK_THROWS_AS(path_for_text("abc", cs), PreconditionError);
  CHECK(logits_for_path({}, 2).rows() == 1);
  FixedRecognizer fixed(fixture_charset(), "skills");
  CHECK(ctc_greedy_decode(fixed.infer(cv::Mat()), fixed.charset()).text == "skills");
}

TEST_CASE("word wrap") {
  CHECK(wrap_words("aaa bbb ccc", 7) == std::vector<std::string>{"aaa bbb", "ccc"});
  CHECK(wrap_words("", 5).empty());
  CHECK(wrap_words("abcdefgh", 3) == std::vector<std::string>{"abcdefgh"});
}

TEST_CASE("stripe code renders and reads back") {
  const auto cs = fixture_charset();
  const StripeBlock block{50, 60, 20, "Hello World, C++ and Python 3.10 rocks"};
  const auto img = render_stripe_page({block}, cs);
  const auto page = letterbox(img);
  const Box extent = stripe_block_extent(block);

  TextRegion r;
  r.box = extent;
  StripeRecognizer rec(cs);
  const auto out = recognize(page, {r}, rec);
  REQUIRE(out.size() == 1);
  CHECK(out[0].text == block.text);
  CHECK(out[0].mean_confidence > 0.99);

  StripeDetector det;
  const auto found = decode(det.infer(page));
  REQUIRE(found.size() == 1);
  CHECK(found[0].box == extent);

  CHECK_THROWS_AS(render_stripe_page({{0, 0, 10, "€"}}, cs), PreconditionError);
}

TEST_CASE("stripe detector finds the five fixture blocks") {
  const auto pages = rasterize(kFixtures / "resume.png");
  REQUIRE(pages.size() == 1);
  auto det = load_detector(kFixtures / "detector.model");
  const auto regions = reading_order(nms(decode(det->infer(pages[0]))));
  REQUIRE(regions.size() == 5);

  std::ifstream truth(kFixtures / "resume_truth.txt");
  std::string label;
  Box b;
  std::size_t i = 0;
  while (truth >> label >> b.x1 >> b.y1 >> b.x2 >> b.y2) {
    REQUIRE(i < regions.size());
    CAPTURE(label);
    CHECK(oracle::box_iou(unletterbox(regions[i].box, pages[0]), b) > 0.95);
    ++i;
  }
  CHECK(i == 5);

  const auto blank = rasterize(kFixtures / "blank.png");
  CHECK(decode(det->infer(blank[0])).empty());
}

TEST_CASE("hashed bag embedding") {
  auto port = load_embedding(kFixtures / "backbone.model");
  CHECK(port->hidden_dim() == 64);
  CHECK(port->reentrant());
  TokenSequence s;
  s.ids[0] = 2;
  s.ids[1] = 7;
  s.ids[2] = 3;
  s.true_length = 3;
  s.mask[0] = s.mask[1] = s.mask[2] = 1;
  const auto h = port->hidden_states(s);
  CHECK(h.rows() == kMaxSequenceLength);
  CHECK(h.cols() == 64);
  CHECK(h == port->hidden_states(s));
  CHECK(h.cwiseAbs().maxCoeff() <= 1.0);

  HashedBagEmbedding a(16, 1), b(16, 2);
  CHECK_FALSE(a.token_vector(5) == b.token_vector(5));
  CHECK(a.token_vector(5) == HashedBagEmbedding(16, 1).token_vector(5));
  CHECK_THROWS_AS(HashedBagEmbedding(0, 1), PreconditionError);
}
