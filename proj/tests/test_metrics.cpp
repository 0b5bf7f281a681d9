// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "resume_ie/error.hpp"
#include "resume_ie/metrics.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

TEST_CASE("confusion counts") {
  const auto cm = confusion({0, 0, 1}, {0, 1, 1}, 2);
  ConfusionMatrix want(2, 2);
  want << 1, 1, 0, 1;
  CHECK(cm == want);
  CHECK(confusion({}, {}, 3) == ConfusionMatrix::Zero(3, 3));
  CHECK(confusion({0, 1, 2}, {0, 1, 2}, 3) == ConfusionMatrix::Identity(3, 3));
  CHECK_THROWS_AS(confusion({0}, {0, 1}, 2), PreconditionError);
  CHECK_THROWS_AS(confusion({0}, {2}, 2), PreconditionError);
}

TEST_CASE("f1 report examples") {
  ConfusionMatrix cm(2, 2);
  cm << 8, 2, 1, 9;
  const auto r = f1_report(cm);
  CHECK(r.micro == 0.85);
  CHECK(r.macro == doctest::Approx(0.849624).epsilon(1e-6));
  CHECK(r.weighted == doctest::Approx(0.849624).epsilon(1e-6));
  CHECK(r.per_class[0].f1 == doctest::Approx(0.842105).epsilon(1e-6));
  CHECK(r.per_class[1].f1 == doctest::Approx(0.857143).epsilon(1e-6));
  CHECK(r.per_class[0].support == 10);

  const auto perfect = f1_report(ConfusionMatrix::Identity(4, 4) * 5);
  CHECK(perfect.micro == 1.0);
  CHECK(perfect.macro == 1.0);
  CHECK(perfect.weighted == 1.0);

  ConfusionMatrix gap(3, 3);
  gap << 5, 0, 0, 0, 5, 0, 0, 0, 0;  // class 2 has no support and no predictions
  const auto g = f1_report(gap);
  CHECK(g.per_class[2].f1 == 0.0);
  CHECK(g.weighted == 1.0);
  CHECK(g.macro == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_AS(f1_report(ConfusionMatrix::Zero(2, 2)), PreconditionError);
}

TEST_CASE("average precision examples") {
  const std::vector<GroundTruthBox> gts = {{"a", 0, {0, 0, 10, 10}}, {"a", 0, {20, 20, 30, 30}}};
  CHECK(average_precision({}, gts, 0.5) == 0.0);
  std::vector<ScoredBox> perfect;
  for (const auto& g : gts) perfect.push_back({g.image_id, 0, 1.0, g.box});
  CHECK(average_precision(perfect, gts, 0.5) == 1.0);

  // a false positive ranked first halves precision at the first hit
  std::vector<ScoredBox> fp_first = {{"a", 0, 0.9, {100, 100, 110, 110}}, {"a", 0, 0.8, {0, 0, 10, 10}}};
  CHECK(average_precision(fp_first, gts, 0.5) == doctest::Approx(0.25));
  CHECK(average_precision(fp_first, gts, 0.5) == doctest::Approx(oracle::average_precision(fp_first, gts, 0.5)));

  const auto t = coco_iou_thresholds();
  CHECK(t.front() == doctest::Approx(0.5));
  CHECK(t.back() == doctest::Approx(0.95));
}

TEST_CASE("crafted ten-box scene matches the oracle") {
  const std::vector<GroundTruthBox> gts = {{"x", 0, {0, 0, 10, 10}},  {"x", 0, {5, 0, 15, 10}},
                                           {"x", 0, {30, 30, 40, 40}}, {"y", 0, {0, 0, 10, 10}},
                                           {"y", 0, {50, 50, 70, 60}}};
  const std::vector<ScoredBox> preds = {
      {"x", 0, 0.95, {1, 0, 11, 10}},   {"x", 0, 0.9, {4, 0, 14, 10}},  {"x", 0, 0.9, {0, 0, 10, 10}},
      {"y", 0, 0.85, {0, 0, 10, 10}},   {"x", 0, 0.7, {31, 31, 41, 41}}, {"y", 0, 0.6, {50, 50, 65, 60}},
      {"y", 0, 0.6, {200, 200, 210, 210}}, {"x", 0, 0.5, {30, 30, 40, 40}}, {"y", 0, 0.4, {0, 0, 10, 10}},
      {"x", 0, 0.3, {5, 0, 15, 10}}};
  for (double thr : coco_iou_thresholds()) {
    CAPTURE(thr);
    CHECK(average_precision(preds, gts, thr) == doctest::Approx(oracle::average_precision(preds, gts, thr)));
  }
}

TEST_CASE("mAP over classes and images") {
  const std::vector<GroundTruthBox> gts = {{"a", 0, {0, 0, 10, 10}}, {"b", 1, {5, 5, 25, 25}}};
  std::vector<ScoredBox> preds;
  for (const auto& g : gts) preds.push_back({g.image_id, g.class_id, 1.0, g.box});
  const auto e = map_eval({"a", "b", "c"}, preds, gts);
  CHECK(e.class_ids == std::vector<int>{0, 1});
  CHECK(e.map50 == 1.0);
  CHECK(e.map50_95 == 1.0);

  const auto none = map_eval({"a", "b"}, {}, gts);
  CHECK(none.map50 == 0.0);
  CHECK(none.map50_95 == 0.0);

  CHECK_THROWS_AS(map_eval({"a", "b"}, {{"zzz", 0, 1.0, {0, 0, 1, 1}}}, gts), PreconditionError);
}

TEST_CASE("prediction and label files") {
  const fs::path dir = fs::temp_directory_path() / "resume_ie_metrics";
  fs::create_directories(dir / "labels");
  const std::vector<ScoredBox> preds = {{"img1", 2, 0.75, {1.5, 2.5, 30.25, 40.125}}, {"img2", 0, 0.5, {0, 0, 1, 1}}};
  save_predictions(dir / "preds.txt", preds);
  const auto back = load_predictions(dir / "preds.txt");
  REQUIRE(back.size() == 2);
  CHECK(back[0].image_id == "img1");
  CHECK(back[0].class_id == 2);
  CHECK(back[0].box == preds[0].box);

  std::ofstream(dir / "labels" / "p1.txt") << "1 0.5 0.5 0.25 0.125\n";
  std::ofstream(dir / "labels" / "p0.txt") << "";
  const auto ld = load_label_directory(dir / "labels");
  CHECK(ld.image_ids == std::vector<std::string>{"p0", "p1"});
  REQUIRE(ld.boxes.size() == 1);
  CHECK(ld.boxes[0].box == Box{240, 280, 400, 360});

  std::ofstream(dir / "labels" / "bad.txt") << "0 1.5 0.5 0.1 0.1\n";
  CHECK_THROWS_AS(load_normalized_labels(dir / "labels" / "bad.txt", "bad"), FormatError);
  fs::remove_all(dir);
}
