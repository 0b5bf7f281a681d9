// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/tokenizers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "resume_ie/error.hpp"
#include "resume_ie/utf8.hpp"

namespace resume_ie {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool is_ascii_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

}  // namespace

std::string_view scheme_name(TokenizerScheme s) {
  switch (s) {
    case TokenizerScheme::wordpiece: return "wordpiece";
    case TokenizerScheme::byte_bpe: return "byte_bpe";
    case TokenizerScheme::unigram: return "unigram";
  }
  return "unknown";
}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw FormatError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

int Vocab::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

int Vocab::require(std::string_view token) const {
  const int id = find(token);
  if (id < 0) throw FormatError("vocabulary lacks required token '" + std::string(token) + "'");
  return id;
}

TokenSequence assemble_sequence(const std::vector<int>& content, const std::vector<int>& prefix,
                                const std::vector<int>& suffix, int pad_id) {
  const std::size_t room = kMaxSequenceLength - prefix.size() - suffix.size();
  const std::size_t keep = std::min(room, content.size());
  TokenSequence seq;
  seq.ids.fill(pad_id);
  std::size_t k = 0;
  for (int id : prefix) seq.ids[k++] = id;
  for (std::size_t i = 0; i < keep; ++i) seq.ids[k++] = content[i];
  for (int id : suffix) seq.ids[k++] = id;
  seq.true_length = static_cast<int>(k);
  for (std::size_t i = 0; i < k; ++i) seq.mask[i] = 1;
  return seq;
}

// --- WordPiece --------------------------------------------------------------

WordPieceTokenizer::WordPieceTokenizer(Vocab vocab) : vocab_(std::move(vocab)) {
  pad_id_ = vocab_.require("[PAD]");
  unk_id_ = vocab_.require("[UNK]");
  cls_id_ = vocab_.require("[CLS]");
  sep_id_ = vocab_.require("[SEP]");
}

WordPieceTokenizer WordPieceTokenizer::load(const std::filesystem::path& vocab_txt) {
  auto lines = read_lines(vocab_txt);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  try {
    return WordPieceTokenizer(Vocab(std::move(lines)));
  } catch (const FormatError& e) {
    throw FormatError(vocab_txt.string() + ": " + e.what());
  }
}

std::vector<std::string> WordPieceTokenizer::word_pieces(std::string_view word) const {
  const std::u32string cps = utf8::decode(word);
  if (cps.empty()) return {};
  if (cps.size() > kMaxWordChars) return {"[UNK]"};
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < cps.size()) {
    std::size_t end = cps.size();
    std::string match;
    while (end > start) {
      std::string cand = utf8::encode(std::u32string_view(cps).substr(start, end - start));
      if (start > 0) cand = "##" + cand;
      if (vocab_.find(cand) >= 0) {
        match = std::move(cand);
        break;
      }
      --end;
    }
    if (match.empty()) return {"[UNK]"};
    pieces.push_back(std::move(match));
    start = end;
  }
  return pieces;
}

std::vector<int> WordPieceTokenizer::content_ids(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& word : utf8::split_whitespace(text)) {
    for (const auto& piece : word_pieces(word)) ids.push_back(vocab_.require(piece));
  }
  return ids;
}

TokenSequence WordPieceTokenizer::encode(std::string_view text) const {
  return assemble_sequence(content_ids(text), {cls_id_}, {sep_id_}, pad_id_);
}

// --- byte-level BPE ---------------------------------------------------------

const std::array<std::string, 256>& ByteBpeTokenizer::byte_units() {
  static const std::array<std::string, 256> units = [] {
    std::array<std::string, 256> u;
    int extra = 0;
    for (int b = 0; b < 256; ++b) {
      const bool printable = (b >= 33 && b <= 126) || (b >= 161 && b <= 172) || (b >= 174 && b <= 255);
      const char32_t cp = printable ? static_cast<char32_t>(b) : static_cast<char32_t>(256 + extra++);
      u[static_cast<std::size_t>(b)] = utf8::encode(cp);
    }
    return u;
  }();
  return units;
}

namespace {

const std::unordered_map<char32_t, unsigned char>& unit_to_byte() {
  static const std::unordered_map<char32_t, unsigned char> inv = [] {
    std::unordered_map<char32_t, unsigned char> m;
    const auto& units = ByteBpeTokenizer::byte_units();
    for (int b = 0; b < 256; ++b) m[utf8::decode(units[static_cast<std::size_t>(b)])[0]] = static_cast<unsigned char>(b);
    return m;
  }();
  return inv;
}

enum class CharClass { space, letter, digit, other };

// ASCII classes; every non-ASCII code point counts as a letter.
CharClass classify(char32_t c) {
  if (is_ascii_space(c)) return CharClass::space;
  if (c >= 0x80) return CharClass::letter;
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return CharClass::letter;
  if (c >= U'0' && c <= U'9') return CharClass::digit;
  return CharClass::other;
}

}  // namespace

std::vector<std::string> ByteBpeTokenizer::pretokenize(std::string_view text) {
  // Classify decoded code points but slice the original bytes, so invalid
  // UTF-8 survives untouched.
  std::vector<std::size_t> offsets;
  const std::u32string cps = utf8::decode(text, offsets);

  static constexpr std::array<std::u32string_view, 7> kContractions = {U"'s", U"'t", U"'re", U"'ve", U"'m", U"'ll", U"'d"};

  std::vector<std::string> chunks;
  auto emit = [&](std::size_t a, std::size_t b) {
    chunks.emplace_back(text.substr(offsets[a], offsets[b] - offsets[a]));
  };
  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    bool done = false;
    for (auto c : kContractions) {
      if (std::u32string_view(cps).substr(i, c.size()) == c) {
        emit(i, i + c.size());
        i += c.size();
        done = true;
        break;
      }
    }
    if (done) continue;

    std::size_t j = i;
    if (cps[i] == U' ' && i + 1 < n && classify(cps[i + 1]) != CharClass::space) j = i + 1;
    const CharClass cls = classify(cps[j]);
    if (cls != CharClass::space) {
      std::size_t k = j + 1;
      while (k < n && classify(cps[k]) == cls) ++k;
      emit(i, k);
      i = k;
      continue;
    }
    std::size_t k = i;
    while (k < n && classify(cps[k]) == CharClass::space) ++k;
    if (k < n && k - i > 1) {
      emit(i, k - 1);  // the last space joins the next word
      i = k - 1;
    } else {
      emit(i, k);
      i = k;
    }
  }
  return chunks;
}

ByteBpeTokenizer::ByteBpeTokenizer(Vocab vocab, std::vector<std::pair<std::string, std::string>> merges)
    : vocab_(std::move(vocab)) {
  bos_id_ = vocab_.require("<s>");
  eos_id_ = vocab_.require("</s>");
  pad_id_ = vocab_.require("<pad>");
  unk_id_ = vocab_.require("<unk>");
  for (std::size_t r = 0; r < merges.size(); ++r) {
    ranks_.emplace(std::move(merges[r]), static_cast<int>(r));  // first occurrence wins
  }
}

ByteBpeTokenizer ByteBpeTokenizer::load(const std::filesystem::path& vocab_json,
                                        const std::filesystem::path& merges_txt) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(vocab_json));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(vocab_json.string() + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError(vocab_json.string() + ": expected a token -> id object");
  std::vector<std::string> tokens(j.size());
  std::vector<bool> used(j.size(), false);
  for (const auto& [tok, id] : j.items()) {
    if (!id.is_number_integer()) throw FormatError(vocab_json.string() + ": id of '" + tok + "' is not an integer");
    const auto v = id.get<long long>();
    if (v < 0 || v >= static_cast<long long>(tokens.size()) || used[static_cast<std::size_t>(v)]) {
      throw FormatError(vocab_json.string() + ": ids must be dense and unique (token '" + tok + "')");
    }
    used[static_cast<std::size_t>(v)] = true;
    tokens[static_cast<std::size_t>(v)] = tok;
  }

  std::vector<std::pair<std::string, std::string>> merges;
  int line_no = 0;
  for (const auto& line : read_lines(merges_txt)) {
    ++line_no;
    if (line.empty() || (line_no == 1 && line.rfind("#version", 0) == 0)) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size() ||
        line.find(' ', sp + 1) != std::string::npos) {
      throw FormatError(merges_txt.string() + ":" + std::to_string(line_no) + ": expected 'left right'");
    }
    merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  try {
    return ByteBpeTokenizer(Vocab(std::move(tokens)), std::move(merges));
  } catch (const FormatError& e) {
    throw FormatError(vocab_json.string() + ": " + e.what());
  }
}

std::vector<std::string> ByteBpeTokenizer::apply_merges(std::vector<std::string> units) const {
  while (units.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    const std::pair<std::string, std::string>* best = nullptr;
    for (std::size_t i = 0; i + 1 < units.size(); ++i) {
      const auto it = ranks_.find({units[i], units[i + 1]});
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best = &it->first;
      }
    }
    if (!best) break;
    const auto pair = *best;
    std::vector<std::string> merged;
    merged.reserve(units.size());
    for (std::size_t i = 0; i < units.size();) {
      if (i + 1 < units.size() && units[i] == pair.first && units[i + 1] == pair.second) {
        merged.push_back(pair.first + pair.second);
        i += 2;
      } else {
        merged.push_back(std::move(units[i]));
        ++i;
      }
    }
    units = std::move(merged);
  }
  return units;
}

std::vector<std::string> ByteBpeTokenizer::pieces(std::string_view text) const {
  const auto& units = byte_units();
  std::vector<std::string> out;
  for (const auto& chunk : pretokenize(text)) {
    std::vector<std::string> u;
    u.reserve(chunk.size());
    for (unsigned char b : chunk) u.push_back(units[b]);
    for (auto& p : apply_merges(std::move(u))) out.push_back(std::move(p));
  }
  return out;
}

std::vector<int> ByteBpeTokenizer::content_ids(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& p : pieces(text)) {
    const int id = vocab_.find(p);
    ids.push_back(id >= 0 ? id : unk_id_);
  }
  return ids;
}

TokenSequence ByteBpeTokenizer::encode(std::string_view text) const {
  return assemble_sequence(content_ids(text), {bos_id_}, {eos_id_}, pad_id_);
}

std::string ByteBpeTokenizer::decode(const std::vector<int>& ids) const {
  const auto& inv = unit_to_byte();
  std::string out;
  for (int id : ids) {
    if (id == bos_id_ || id == eos_id_ || id == pad_id_ || id == unk_id_) continue;
    for (char32_t cp : utf8::decode(vocab_.token(id))) {
      const auto it = inv.find(cp);
      if (it == inv.end()) throw FormatError("token '" + vocab_.token(id) + "' is not byte-level");
      out.push_back(static_cast<char>(it->second));
    }
  }
  return out;
}

std::string ByteBpeTokenizer::decode(const TokenSequence& seq) const {
  return decode(std::vector<int>(seq.ids.begin(), seq.ids.begin() + seq.true_length));
}

// --- unigram ----------------------------------------------------------------

namespace {
constexpr std::array<std::string_view, 6> kUnigramSpecials = {"<unk>", "<s>", "</s>", "<cls>", "<sep>", "<pad>"};
constexpr double kUnkPenaltyBelowMin = 10.0;
}  // namespace

UnigramTokenizer::UnigramTokenizer(std::vector<std::string> pieces, std::vector<double> scores)
    : vocab_(pieces), scores_(std::move(scores)) {
  if (scores_.size() != pieces.size()) throw FormatError("piece/score count mismatch");
  unk_id_ = vocab_.require("<unk>");
  pad_id_ = vocab_.require("<pad>");
  sep_id_ = vocab_.require("<sep>");
  cls_id_ = vocab_.require("<cls>");

  double min_score = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (std::find(kUnigramSpecials.begin(), kUnigramSpecials.end(), pieces[i]) != kUnigramSpecials.end()) continue;
    if (!std::isfinite(scores_[i])) throw FormatError("non-finite score for piece '" + pieces[i] + "'");
    std::u32string cps = utf8::decode(pieces[i]);
    max_piece_chars_ = std::max(max_piece_chars_, cps.size());
    piece_index_.emplace(std::move(cps), static_cast<int>(i));
    min_score = any ? std::min(min_score, scores_[i]) : scores_[i];
    any = true;
  }
  unk_penalty_ = min_score - kUnkPenaltyBelowMin;
}

UnigramTokenizer UnigramTokenizer::load(const std::filesystem::path& pieces_tsv) {
  std::vector<std::string> pieces;
  std::vector<double> scores;
  int line_no = 0;
  for (const auto& line : read_lines(pieces_tsv)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(pieces_tsv.string() + ":" + std::to_string(line_no) + ": expected piece<TAB>score");
    }
    pieces.push_back(line.substr(0, tab));
    try {
      std::size_t used = 0;
      const std::string num = line.substr(tab + 1);
      scores.push_back(std::stod(num, &used));
      if (used != num.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw FormatError(pieces_tsv.string() + ":" + std::to_string(line_no) + ": bad score");
    }
  }
  try {
    return UnigramTokenizer(std::move(pieces), std::move(scores));
  } catch (const FormatError& e) {
    throw FormatError(pieces_tsv.string() + ": " + e.what());
  }
}

UnigramTokenizer::Segmentation UnigramTokenizer::segment(std::string_view marked_word) const {
  const std::u32string cps = utf8::decode(marked_word);
  const std::size_t n = cps.size();
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> best(n + 1, kNone);
  std::vector<std::size_t> from(n + 1, 0);
  std::vector<int> via(n + 1, -1);
  best[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i] == kNone) continue;
    bool single = false;
    for (std::size_t len = 1; len <= max_piece_chars_ && i + len <= n; ++len) {
      const auto it = piece_index_.find(cps.substr(i, len));
      if (it == piece_index_.end()) continue;
      if (len == 1) single = true;
      const double s = best[i] + scores_[static_cast<std::size_t>(it->second)];
      if (s > best[i + len]) {
        best[i + len] = s;
        from[i + len] = i;
        via[i + len] = it->second;
      }
    }
    if (!single) {
      const double s = best[i] + unk_penalty_;
      if (s > best[i + 1]) {
        best[i + 1] = s;
        from[i + 1] = i;
        via[i + 1] = unk_id_;
      }
    }
  }

  Segmentation seg;
  seg.score = n == 0 ? 0.0 : best[n];
  std::vector<int> rev;
  for (std::size_t k = n; k > 0; k = from[k]) rev.push_back(via[k]);
  for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
    if (*it == unk_id_ && !seg.ids.empty() && seg.ids.back() == unk_id_) continue;
    seg.ids.push_back(*it);
  }
  return seg;
}

std::vector<int> UnigramTokenizer::content_ids(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& word : utf8::split_whitespace(text)) {
    const auto seg = segment(std::string(kWordBoundary) + word);
    ids.insert(ids.end(), seg.ids.begin(), seg.ids.end());
  }
  return ids;
}

TokenSequence UnigramTokenizer::encode(std::string_view text) const {
  return assemble_sequence(content_ids(text), {}, {sep_id_, cls_id_}, pad_id_);
}

// --- factory ----------------------------------------------------------------

TokenizerScheme scheme_for_model(std::string_view model_name) {
  if (model_name == "bert" || model_name == "distilbert") return TokenizerScheme::wordpiece;
  if (model_name == "roberta") return TokenizerScheme::byte_bpe;
  if (model_name == "xlnet") return TokenizerScheme::unigram;
  throw PreconditionError("unknown model name '" + std::string(model_name) +
                          "' (expected bert, distilbert, roberta or xlnet)");
}

std::unique_ptr<Tokenizer> build_tokenizer(std::string_view model_name, const TokenizerFiles& files,
                                           const std::function<void(const std::string&)>& warn) {
  const TokenizerScheme scheme = scheme_for_model(model_name);
  std::unique_ptr<Tokenizer> tok;
  int expected = 0;
  switch (scheme) {
    case TokenizerScheme::wordpiece:
      tok = std::make_unique<WordPieceTokenizer>(WordPieceTokenizer::load(files.vocab));
      expected = kBertVocabSize;
      break;
    case TokenizerScheme::byte_bpe:
      if (files.merges.empty()) throw PreconditionError("roberta needs a merges file");
      tok = std::make_unique<ByteBpeTokenizer>(ByteBpeTokenizer::load(files.vocab, files.merges));
      expected = kRobertaVocabSize;
      break;
    case TokenizerScheme::unigram:
      tok = std::make_unique<UnigramTokenizer>(UnigramTokenizer::load(files.vocab));
      expected = kXlnetVocabSize;
      break;
  }
  if (tok->vocab().size() != expected) {
    const std::string msg = "warning: " + std::string(model_name) + " vocabulary has " +
                            std::to_string(tok->vocab().size()) + " entries, published size is " +
                            std::to_string(expected);
    if (warn) {
      warn(msg);
    } else {
      std::cerr << msg << '\n';
    }
  }
  return tok;
}

}  // namespace resume_ie
