// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "resume_ie/error.hpp"
#include "resume_ie/tokenizers.hpp"
#include "toy_models.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

namespace {

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("resume_ie_tok_" + name); }

std::vector<std::string> tokens_of(const Tokenizer& tok, const TokenSequence& seq) {
  std::vector<std::string> out;
  for (int i = 0; i < seq.true_length; ++i) out.push_back(tok.vocab().token(seq.ids[static_cast<std::size_t>(i)]));
  return out;
}

}  // namespace

TEST_CASE("wordpiece greedy longest match") {
  const auto tok = toy::wordpiece();
  CHECK(tok.word_pieces("unaffable") == std::vector<std::string>{"un", "##aff", "##able"});
  CHECK(tok.word_pieces("running") == std::vector<std::string>{"runn", "##ing"});
  CHECK(tok.word_pieces("lowest") == std::vector<std::string>{"lowest"});
  CHECK(tok.word_pieces("xyz") == std::vector<std::string>{"[UNK]"});

  const auto seq = tok.encode("unaffable");
  CHECK(tokens_of(tok, seq) == std::vector<std::string>{"[CLS]", "un", "##aff", "##able", "[SEP]"});
  CHECK(seq.true_length == 5);
  for (int i = 5; i < kMaxSequenceLength; ++i) CHECK(seq.ids[static_cast<std::size_t>(i)] == tok.pad_id());
}

TEST_CASE("wordpiece truncation keeps cls and sep") {
  const auto tok = toy::wordpiece();
  std::string text;
  for (int i = 0; i < 200; ++i) text += "low ";
  const auto seq = tok.encode(text);
  CHECK(seq.true_length == kMaxSequenceLength);
  CHECK(tok.vocab().token(seq.ids[0]) == "[CLS]");
  CHECK(tok.vocab().token(seq.ids[kMaxSequenceLength - 1]) == "[SEP]");
}

TEST_CASE("vocab lookups") {
  const Vocab v({"a", "b"});
  CHECK(v.find("b") == 1);
  CHECK(v.find("c") == -1);
  CHECK_THROWS_WITH_AS(v.require("c"), doctest::Contains("c"), FormatError);
  CHECK_THROWS_AS(WordPieceTokenizer(Vocab({"[PAD]"})), FormatError);
}

TEST_CASE("byte units are a bijection onto printable units") {
  const auto& u = ByteBpeTokenizer::byte_units();
  CHECK(std::set<std::string>(u.begin(), u.end()).size() == 256);
  CHECK(u[static_cast<unsigned char>('a')] == "a");
  CHECK(u[static_cast<unsigned char>(' ')] == "\xC4\xA0");  // U+0120
}

TEST_CASE("byte BPE merges in rank order") {
  std::vector<std::string> tokens = {"<s>", "<pad>", "</s>", "<unk>", "a", "b", "aa"};
  ByteBpeTokenizer tok(Vocab(tokens), {{"a", "a"}});
  CHECK(tok.pieces("aaab") == std::vector<std::string>{"aa", "a", "b"});
  CHECK(tok.apply_merges({"a", "a", "a", "a"}) == std::vector<std::string>{"aa", "aa"});

  const auto empty = tok.encode("");
  CHECK(empty.true_length == 2);
  CHECK(tok.vocab().token(empty.ids[0]) == "<s>");
  CHECK(tok.vocab().token(empty.ids[1]) == "</s>");
}

TEST_CASE("byte BPE pretokenization is lossless") {
  for (std::string s : {"Hello world", "it's  a   test", "abc123def", "ünïcödé sträße", " lead", "trail  ", ""}) {
    std::string joined;
    for (const auto& c : ByteBpeTokenizer::pretokenize(s)) joined += c;
    CHECK(joined == s);
  }
  CHECK(ByteBpeTokenizer::pretokenize("Hello world") == std::vector<std::string>{"Hello", " world"});
}

TEST_CASE("byte BPE decode inverts encode") {
  const auto tok = toy::byte_bpe();
  for (std::string s : {"the other", "café résumé", "日本語 テキスト", "emoji 😀 ok", "tabs\tand\nnewlines"}) {
    CHECK(tok.decode(tok.encode(s)) == s);
  }
}

TEST_CASE("byte BPE load from files") {
  const auto vj = temp_path("vocab.json");
  const auto mt = temp_path("merges.txt");
  nlohmann::json j;
  int id = 0;
  for (const auto* t : {"<s>", "<pad>", "</s>", "<unk>", "a", "b", "ab"}) j[t] = id++;
  std::ofstream(vj) << j.dump();
  std::ofstream(mt) << "#version: 0.2\na b\n";
  const auto tok = ByteBpeTokenizer::load(vj, mt);
  CHECK(tok.pieces("abab") == std::vector<std::string>{"ab", "ab"});
  std::ofstream(mt) << "a b c\n";
  CHECK_THROWS_AS(ByteBpeTokenizer::load(vj, mt), FormatError);
  fs::remove(vj);
  fs::remove(mt);
}

TEST_CASE("unigram segmentation") {
  const auto tok = toy::unigram();
  const std::string m(UnigramTokenizer::kWordBoundary);
  // only "▁" + "c" covers "▁c"
  const auto seg = tok.segment(m + "c");
  REQUIRE(seg.ids.size() == 2);
  CHECK(tok.vocab().token(seg.ids[0]) == m);
  CHECK(tok.vocab().token(seg.ids[1]) == "c");
  CHECK(seg.score == doctest::Approx(-2.0 - 1.9));

  // uncovered characters become one fused unk
  const auto unk = tok.segment(m + "axyb");
  std::vector<std::string> pieces;
  for (int i : unk.ids) pieces.push_back(tok.vocab().token(i));
  CHECK(pieces == std::vector<std::string>{m + "a", "<unk>", "b"});
  CHECK(unk.score == doctest::Approx(-2.6 + 2 * tok.unk_penalty() - 1.7));

  const auto seq = tok.encode("ab c");
  const auto names = tokens_of(tok, seq);
  CHECK(names.back() == "<cls>");
  CHECK(names[names.size() - 2] == "<sep>");
}

TEST_CASE("unigram load") {
  const auto p = temp_path("pieces.tsv");
  std::ofstream(p) << "<unk>\t0\n<s>\t0\n</s>\t0\n<cls>\t0\n<sep>\t0\n<pad>\t0\n\xE2\x96\x81" "a\t-1.5\n";
  const auto tok = UnigramTokenizer::load(p);
  CHECK(tok.vocab().size() == 7);
  std::ofstream(p) << "<unk>\tnope\n";
  CHECK_THROWS_AS(UnigramTokenizer::load(p), FormatError);
  fs::remove(p);
}

TEST_CASE("model family selects the scheme and warns on vocabulary size") {
  CHECK(scheme_for_model("distilbert") == TokenizerScheme::wordpiece);
  CHECK(scheme_for_model("bert") == TokenizerScheme::wordpiece);
  CHECK(scheme_for_model("roberta") == TokenizerScheme::byte_bpe);
  CHECK(scheme_for_model("xlnet") == TokenizerScheme::unigram);
  CHECK_THROWS_AS(scheme_for_model("gpt9"), PreconditionError);

  std::vector<std::string> warnings;
  const auto tok = build_tokenizer("distilbert", {fs::path(RESUME_IE_FIXTURE_DIR) / "vocab.txt", {}},
                                   [&](const std::string& m) { warnings.push_back(m); });
  CHECK(tok->scheme() == TokenizerScheme::wordpiece);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("30522") != std::string::npos);

  // a vocabulary of the published size is accepted silently
  const auto p = temp_path("vocab30522.txt");
  {
    std::ofstream out(p);
    out << "[PAD]\n[UNK]\n[CLS]\n[SEP]\n";
    for (int i = 4; i < kBertVocabSize; ++i) out << "tok" << i << "\n";
  }
  warnings.clear();
  build_tokenizer("bert", {p, {}}, [&](const std::string& m) { warnings.push_back(m); });
  CHECK(warnings.empty());
  fs::remove(p);
}
