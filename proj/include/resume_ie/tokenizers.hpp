// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Subword tokenizers sharing one fixed-length encoding contract:
// 75 positions, right padding, mask[i] = 1 iff i < true_length.
//
// Special-token layouts follow each model family:
//   wordpiece  [CLS] pieces [SEP]
//   byte_bpe   <s> pieces </s>
//   unigram    pieces <sep> <cls>

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace resume_ie {

inline constexpr int kMaxSequenceLength = 75;

enum class TokenizerScheme { wordpiece, byte_bpe, unigram };

std::string_view scheme_name(TokenizerScheme s);

struct TokenSequence {
  std::array<std::int32_t, kMaxSequenceLength> ids{};
  std::array<std::uint8_t, kMaxSequenceLength> mask{};
  int true_length = 0;

  bool operator==(const TokenSequence&) const = default;
};

/// Token table shared by all schemes: dense ids in [0, size()).
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<std::string> tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  /// Id of `token`, or -1.
  int find(std::string_view token) const;
  /// Id of a required token; throws FormatError naming it otherwise.
  int require(std::string_view token) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual TokenizerScheme scheme() const = 0;
  virtual const Vocab& vocab() const = 0;
  /// Content piece ids, without specials, before truncation.
  virtual std::vector<int> content_ids(std::string_view text) const = 0;
  /// Fixed-length encoding with specials; content truncated from the tail.
  virtual TokenSequence encode(std::string_view text) const = 0;

  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }

 protected:
  int pad_id_ = 0;
  int unk_id_ = 0;
};

/// Lays out `prefix + content + suffix` into 75 slots, keeping the leading
/// content pieces when it does not fit.
TokenSequence assemble_sequence(const std::vector<int>& content, const std::vector<int>& prefix,
                                const std::vector<int>& suffix, int pad_id);

class WordPieceTokenizer final : public Tokenizer {
 public:
  /// vocab.txt: one token per line, line index = id.
  static WordPieceTokenizer load(const std::filesystem::path& vocab_txt);
  explicit WordPieceTokenizer(Vocab vocab);

  TokenizerScheme scheme() const override { return TokenizerScheme::wordpiece; }
  const Vocab& vocab() const override { return vocab_; }
  std::vector<int> content_ids(std::string_view text) const override;
  TokenSequence encode(std::string_view text) const override;

  /// Greedy longest-match pieces for one word ("##" on continuations), or
  /// {"[UNK]"} when the word cannot be covered.
  std::vector<std::string> word_pieces(std::string_view word) const;

  static constexpr std::size_t kMaxWordChars = 100;

 private:
  Vocab vocab_;
  int cls_id_ = 0;
  int sep_id_ = 0;
};

class ByteBpeTokenizer final : public Tokenizer {
 public:
  /// vocab.json: {"token": id, ...}; merges.txt: "left right" per line by
  /// ascending rank, optional "#version" header.
  static ByteBpeTokenizer load(const std::filesystem::path& vocab_json,
                               const std::filesystem::path& merges_txt);
  ByteBpeTokenizer(Vocab vocab, std::vector<std::pair<std::string, std::string>> merges);

  TokenizerScheme scheme() const override { return TokenizerScheme::byte_bpe; }
  const Vocab& vocab() const override { return vocab_; }
  std::vector<int> content_ids(std::string_view text) const override;
  TokenSequence encode(std::string_view text) const override;

  /// Byte-unit pieces after merging, before id lookup.
  std::vector<std::string> pieces(std::string_view text) const;
  /// Inverse of encode for every non-special id.
  std::string decode(const std::vector<int>& ids) const;
  std::string decode(const TokenSequence& seq) const;

  /// Reversible byte -> printable unit mapping (GPT-2 convention).
  static const std::array<std::string, 256>& byte_units();
  /// Pre-tokenization chunks; their concatenation is the input.
  static std::vector<std::string> pretokenize(std::string_view text);
  /// Merges applied to one unit sequence in ascending rank order.
  std::vector<std::string> apply_merges(std::vector<std::string> units) const;

 private:
  Vocab vocab_;
  std::map<std::pair<std::string, std::string>, int> ranks_;
  int bos_id_ = 0;
  int eos_id_ = 0;
};

class UnigramTokenizer final : public Tokenizer {
 public:
  /// pieces.tsv: "piece<TAB>log_prob" per line, line index = id. Specials
  /// <unk>, <sep>, <cls>, <pad> are required.
  static UnigramTokenizer load(const std::filesystem::path& pieces_tsv);
  UnigramTokenizer(std::vector<std::string> pieces, std::vector<double> scores);

  TokenizerScheme scheme() const override { return TokenizerScheme::unigram; }
  const Vocab& vocab() const override { return vocab_; }
  std::vector<int> content_ids(std::string_view text) const override;
  TokenSequence encode(std::string_view text) const override;

  struct Segmentation {
    std::vector<int> ids;  // consecutive unknown characters fused into one <unk>
    double score = 0.0;
  };
  /// Viterbi best segmentation of one already-marked word (e.g. "▁hello").
  Segmentation segment(std::string_view marked_word) const;

  double score(int id) const { return scores_.at(static_cast<std::size_t>(id)); }
  /// Score charged for one character no piece covers.
  double unk_penalty() const { return unk_penalty_; }

  static constexpr std::string_view kWordBoundary = "\xE2\x96\x81";  // U+2581

 private:
  Vocab vocab_;
  std::vector<double> scores_;
  std::unordered_map<std::u32string, int> piece_index_;  // non-special pieces
  std::size_t max_piece_chars_ = 1;
  double unk_penalty_ = -10.0;
  int sep_id_ = 0;
  int cls_id_ = 0;
};

/// Vocabulary sizes of the published checkpoints.
inline constexpr int kBertVocabSize = 30522;
inline constexpr int kRobertaVocabSize = 50265;
inline constexpr int kXlnetVocabSize = 32000;

struct TokenizerFiles {
  std::filesystem::path vocab;   // vocab.txt, vocab.json or pieces.tsv
  std::filesystem::path merges;  // byte_bpe only
};

TokenizerScheme scheme_for_model(std::string_view model_name);

/// bert/distilbert -> wordpiece, roberta -> byte_bpe, xlnet -> unigram. A
/// vocabulary size different from the published one is reported through
/// `warn` (stderr when empty) and accepted.
std::unique_ptr<Tokenizer> build_tokenizer(std::string_view model_name, const TokenizerFiles& files,
                                           const std::function<void(const std::string&)>& warn = {});

}  // namespace resume_ie
