// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Section-text normalization and the five augmentation strategies.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "resume_ie/corpus.hpp"

namespace resume_ie {

struct NormalizationRules {
  bool lowercase = true;
  bool strip_punctuation = true;
  std::set<std::string> header_lexicon;  // single- or multi-word section headers
  std::set<std::string> stopwords;

  /// Shipped English conjunction/preposition list and header lexicon.
  static NormalizationRules defaults();
  /// Replaces the lexicon and/or stopwords with one-token-per-line files.
  static NormalizationRules from_files(const std::filesystem::path& header_lexicon,
                                       const std::filesystem::path& stopwords);
};

const std::vector<std::string>& default_header_lexicon();
const std::vector<std::string>& default_stopwords();

/// Reads a UTF-8 file with one entry per line; blank lines and '#' comments skipped.
std::vector<std::string> load_word_list(const std::filesystem::path& path);

/// Lowercase, punctuation to spaces, stopwords out, leading section headers
/// out, whitespace collapsed. Idempotent.
std::string normalize(std::string_view text, const NormalizationRules& rules);

std::string lowercase(std::string_view text);

// --- augmentation -----------------------------------------------------------

enum class AugmentStrategy : int {
  char_delete = 0,
  char_substitute = 1,
  word_insert = 2,
  contextual_substitute = 3,
  back_translate = 4,
};
inline constexpr int kNumStrategies = 5;

std::string_view strategy_name(AugmentStrategy s);

struct AugmentRates {
  double char_rate = 0.10;        // share of characters touched by char ops
  double insert_rate = 0.05;      // share of words inserted
  double substitute_rate = 0.15;  // share of words replaced by contextual_substitute
};

struct AugmentPlan {
  int factor = 3;
  std::array<double, kNumStrategies> strategy_mix{1.0, 1.0, 1.0, 1.0, 1.0};
  std::uint64_t seed = 0;
  AugmentRates rates;

  /// Throws PreconditionError unless factor >= 1 and the mix is non-negative
  /// with a positive sum.
  void validate() const;
};

/// Ranked similar-word candidates (at most 100 are used).
class SimilarityPort {
 public:
  virtual ~SimilarityPort() = default;
  virtual std::vector<std::string> similar(const std::string& word) = 0;
};

class TranslatorPort {
 public:
  virtual ~TranslatorPort() = default;
  virtual std::string forward(const std::string& text) = 0;
  virtual std::string reverse(const std::string& text) = 0;
};

class IdentityTranslator final : public TranslatorPort {
 public:
  std::string forward(const std::string& text) override { return text; }
  std::string reverse(const std::string& text) override { return text; }
};

/// Similarity table file: "word<TAB>cand1 cand2 ..." per line, best first.
class TableSimilarity final : public SimilarityPort {
 public:
  explicit TableSimilarity(const std::filesystem::path& path);
  std::vector<std::string> similar(const std::string& word) override;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> table_;
};

inline constexpr std::size_t kMaxSimilarCandidates = 100;

struct AugmentContext {
  SimilarityPort* similarity = nullptr;
  TranslatorPort* translator = nullptr;
  std::vector<std::string> vocabulary;  // word_insert draws from here
};

/// Sorted distinct words of the records' working text (normalized if present).
std::vector<std::string> build_vocabulary(const std::vector<SectionRecord>& records);

/// Removes the code points at `positions` (indices into the decoded text).
std::string delete_chars(std::string_view text, const std::vector<std::size_t>& positions);

std::string char_delete(std::string_view text, double rate, std::mt19937_64& rng);
std::string char_substitute(std::string_view text, double rate, std::mt19937_64& rng);
std::string word_insert(std::string_view text, const std::vector<std::string>& vocabulary,
                        double rate, std::mt19937_64& rng);
/// ceil(rate * words) positions, chosen among words that have candidates,
/// each replaced by a random candidate from its top-100 list.
std::string contextual_substitute(std::string_view text, SimilarityPort& port, double rate,
                                  std::mt19937_64& rng);
std::string back_translate(std::string_view text, TranslatorPort& port);

/// One augmented copy; RNG seeded from (plan.seed, record_id, copy_index).
SectionRecord augment_record(const SectionRecord& record, const AugmentPlan& plan, int copy_index,
                             const AugmentContext& ctx);

/// Each original followed by its factor - 1 copies. `jobs` > 1 runs records
/// in parallel with identical output; port calls are then serialized.
std::vector<SectionRecord> augment_dataset(const std::vector<SectionRecord>& records,
                                           const AugmentPlan& plan, AugmentContext ctx,
                                           int jobs = 1);

}  // namespace resume_ie
