// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Small hand-built tokenizers and ports shared by the test binaries.

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "resume_ie/textprep.hpp"
#include "resume_ie/tokenizers.hpp"
#include "resume_ie/utf8.hpp"

namespace toy {

using SimilarityTable = std::map<std::string, std::vector<std::string>>;

/// Classic WordPiece example vocabulary.
inline resume_ie::WordPieceTokenizer wordpiece() {
  return resume_ie::WordPieceTokenizer(resume_ie::Vocab(
      {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "un", "##aff", "##able", "runn", "##ing", ",", "low", "lowest"}));
}

/// Every byte unit plus a handful of merges over them.
inline resume_ie::ByteBpeTokenizer byte_bpe() {
  const auto& u = resume_ie::ByteBpeTokenizer::byte_units();
  auto unit = [&](char c) { return u[static_cast<unsigned char>(c)]; };
  std::vector<std::pair<std::string, std::string>> merges = {
      {unit(' '), unit('t')}, {unit('h'), unit('e')}, {unit(' ') + unit('t'), unit('h') + unit('e')},
      {unit('i'), unit('n')}, {unit('e'), unit('r')}, {u[0xC3], u[0xA9]},
      {unit('a'), unit('a')}, {unit(' '), unit(' ')}};
  std::vector<std::string> tokens = {"<s>", "<pad>", "</s>", "<unk>"};
  for (const auto& s : u) tokens.push_back(s);
  for (const auto& [l, r] : merges) tokens.push_back(l + r);
  return resume_ie::ByteBpeTokenizer(resume_ie::Vocab(std::move(tokens)), std::move(merges));
}

/// Ten scored pieces over {a, b, c} and the word boundary.
inline std::vector<std::pair<std::string, double>> unigram_pieces() {
  const std::string m(resume_ie::UnigramTokenizer::kWordBoundary);
  return {{m, -2.0},         {"a", -1.5},  {"b", -1.7},  {"c", -1.9},       {"ab", -2.2},
          {"bc", -2.5},      {"abc", -3.9}, {m + "a", -2.6}, {"ca", -2.8}, {m + "ab", -4.5}};
}

inline std::map<std::u32string, double> unigram_scores() {
  std::map<std::u32string, double> out;
  for (const auto& [p, s] : unigram_pieces()) out[resume_ie::utf8::decode(p)] = s;
  return out;
}

inline resume_ie::UnigramTokenizer unigram() {
  std::vector<std::string> pieces = {"<unk>", "<s>", "</s>", "<cls>", "<sep>", "<pad>"};
  std::vector<double> scores(pieces.size(), 0.0);
  for (const auto& [p, s] : unigram_pieces()) {
    pieces.push_back(p);
    scores.push_back(s);
  }
  return resume_ie::UnigramTokenizer(std::move(pieces), std::move(scores));
}

/// In-memory similarity table.
class MapSimilarity final : public resume_ie::SimilarityPort {
 public:
  MapSimilarity()
      : table_({{"python", {"java", "ruby", "perl"}},
                {"engineer", {"developer", "programmer"}},
                {"university", {"college", "school"}},
                {"english", {"german", "french"}},
                {"software", {"hardware", "firmware"}}}) {}
  explicit MapSimilarity(SimilarityTable table) : table_(std::move(table)) {}

  std::vector<std::string> similar(const std::string& word) override {
    const auto it = table_.find(word);
    return it == table_.end() ? std::vector<std::string>{} : it->second;
  }

 private:
  SimilarityTable table_;
};

}  // namespace toy
