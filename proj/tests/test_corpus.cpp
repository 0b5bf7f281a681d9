// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "oracles.hpp"
#include "resume_ie/corpus.hpp"
#include "resume_ie/error.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

namespace {

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path p = fs::temp_directory_path() / ("resume_ie_corpus_" + name);
  std::ofstream(p, std::ios::binary) << contents;
  return p;
}

SectionRecord rec(const std::string& id, const std::string& person, ClassLabel label) {
  SectionRecord r;
  r.record_id = id;
  r.person_id = person;
  r.label = label;
  r.text = "text of " + id;
  return r;
}

}  // namespace

TEST_CASE("class catalog ids are fixed") {
  CHECK(class_id(ClassLabel::education) == 0);
  CHECK(class_id(ClassLabel::language) == 4);
  for (auto c : all_classes()) CHECK(class_from_name(class_name(c)) == c);
  CHECK_FALSE(class_from_name("hobby").has_value());
  CHECK_THROWS_AS(class_from_id(5), PreconditionError);
  CHECK(load_classes_file(fs::path(RESUME_IE_FIXTURE_DIR) / "classes.txt").size() == 5);
}

TEST_CASE("text dataset round trip") {
  std::vector<SectionRecord> rs = {rec("a", "p1", ClassLabel::skill), rec("b", "p1", ClassLabel::personal)};
  rs[1].normalized_text = "already normal";
  const auto p = temp_file("roundtrip.jsonl", format_text_dataset(rs));
  CHECK(load_text_dataset(p) == rs);
  fs::remove(p);
}

TEST_CASE("text dataset errors") {
  CHECK(parse_text_dataset("").empty());
  CHECK(parse_text_dataset("\n\n").empty());
  CHECK_THROWS_WITH_AS(parse_text_dataset(R"({"record_id":"a","person_id":"p","label":"hobby","text":"x"})"),
                       doctest::Contains("hobby"), FormatError);
  CHECK_THROWS_WITH_AS(parse_text_dataset("{\"record_id\":\"a\"}\nnot json"), doctest::Contains("1"), FormatError);
  const std::string dup = R"({"record_id":"a","person_id":"p","label":"skill","text":"x"})";
  CHECK_THROWS_AS(parse_text_dataset(dup + "\n" + dup), FormatError);
}

TEST_CASE("fixture corpus has 200 records") {
  const auto rs = load_text_dataset(fs::path(RESUME_IE_FIXTURE_DIR) / "corpus.jsonl");
  CHECK(rs.size() == 200);
  const auto counts = count_classes(rs);
  for (auto n : counts) CHECK(n == 40);
}

TEST_CASE("class weights follow N / (K n_c)") {
  // personal 286, education 282, skill 281, experience 272, language 231
  ClassCounts counts{};
  counts[class_id(ClassLabel::personal)] = 286;
  counts[class_id(ClassLabel::education)] = 282;
  counts[class_id(ClassLabel::skill)] = 281;
  counts[class_id(ClassLabel::experience)] = 272;
  counts[class_id(ClassLabel::language)] = 231;
  const auto w = compute_class_weights(counts);
  CHECK(w[ClassLabel::personal] == doctest::Approx(0.9455).epsilon(1e-4));
  CHECK(w[ClassLabel::education] == doctest::Approx(0.9589).epsilon(1e-4));
  CHECK(w[ClassLabel::skill] == doctest::Approx(0.9623).epsilon(1e-4));
  CHECK(w[ClassLabel::experience] == doctest::Approx(0.9941).epsilon(1e-4));
  CHECK(w[ClassLabel::language] == doctest::Approx(1.1706).epsilon(1e-4));
  CHECK(w[ClassLabel::personal] == doctest::Approx(1352.0 / (5 * 286)));

  const auto eq = compute_class_weights(ClassCounts{10, 10, 10, 10, 10});
  for (double v : eq.weights) CHECK(v == 1.0);
  CHECK_THROWS_AS(compute_class_weights(ClassCounts{10, 0, 10, 10, 10}), PreconditionError);
}

TEST_CASE("largest remainder matches the integer oracle") {
  for (std::size_t n = 0; n <= 300; ++n) {
    const auto got = largest_remainder(n, {0.70, 0.15, 0.15});
    CHECK(got == oracle::apportion_percent(n, {70, 15, 15}));
  }
}

TEST_CASE("split by person: 20 persons give 14/3/3") {
  const auto rs = load_text_dataset(fs::path(RESUME_IE_FIXTURE_DIR) / "people20.jsonl");
  const auto a = split_by_person(rs, SplitRatios{}, 7);
  CHECK(a.person_counts == std::array<std::size_t, 3>{14, 3, 3});
  CHECK(a.train.size() + a.val.size() + a.test.size() == rs.size());

  const auto b = split_by_person(rs, SplitRatios{}, 7);
  CHECK(a.train == b.train);
  CHECK(a.val == b.val);
  CHECK(a.test == b.test);

  // order of the input does not matter
  auto reversed = rs;
  std::reverse(reversed.begin(), reversed.end());
  const auto c = split_by_person(reversed, SplitRatios{}, 7);
  CHECK(std::set<std::string>(c.test.begin(), c.test.end()) == std::set<std::string>(a.test.begin(), a.test.end()));
}

TEST_CASE("split preconditions") {
  std::vector<SectionRecord> one = {rec("a", "p1", ClassLabel::skill)};
  CHECK_THROWS_AS(split_by_person(one, SplitRatios{1.0, 0.0, 0.0}, 1), PreconditionError);
  CHECK_THROWS_AS(split_by_person(one, SplitRatios{}, 1), PreconditionError);
  CHECK_THROWS_AS(split_by_person(one, SplitRatios{0.5, 0.2, 0.2}, 1), PreconditionError);
}
