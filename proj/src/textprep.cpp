// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/textprep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <numeric>
#include <thread>

#include "resume_ie/error.hpp"
#include "resume_ie/seeding.hpp"
#include "resume_ie/utf8.hpp"

namespace resume_ie {

namespace {

char32_t to_lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;  // Latin-1
  if (c == 0x130) return U'i';                              // dotted capital I
  if (c == 0x178) return 0xFF;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return (c % 2 == 0) ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  return c;
}

bool is_punct(char32_t c) {
  if (c < 0x80) return std::ispunct(static_cast<int>(c)) != 0;
  if (c >= 0x2010 && c <= 0x205E) return true;  // general punctuation, incl. bullets
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x25CF: case 0x25AA: case 0x25E6:  // list bullets
      return true;
    default:
      return false;
  }
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
         c == 0xA0 || (c >= 0x2000 && c <= 0x200A) || c == 0x3000;
}

// Lowercase + punctuation folding, split into words.
std::vector<std::string> fold_words(std::string_view text, bool lower, bool strip_punct) {
  std::u32string cps = utf8::decode(text);
  for (auto& c : cps) {
    if (lower) c = to_lower(c);
    if (is_space(c) || (strip_punct && is_punct(c))) c = U' ';
  }
  return utf8::split_whitespace(utf8::encode(cps));
}

std::vector<std::string> remove_stopwords(std::vector<std::string> words,
                                          const std::set<std::string>& stopwords) {
  words.erase(std::remove_if(words.begin(), words.end(),
                             [&](const std::string& w) { return stopwords.count(w) > 0; }),
              words.end());
  return words;
}

std::size_t ceil_count(double rate, std::size_t n) {
  if (rate <= 0.0 || n == 0) return 0;
  return std::min(n, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-12)));
}

// k distinct indices from [0, n), ascending.
std::vector<std::size_t> sample_positions(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> non_space_positions(const std::u32string& cps) {
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!is_space(cps[i])) pos.push_back(i);
  }
  return pos;
}

const std::string& working_text(const SectionRecord& r) {
  return r.normalized_text ? *r.normalized_text : r.text;
}

class LockedSimilarity final : public SimilarityPort {
 public:
  LockedSimilarity(SimilarityPort& inner, std::mutex& m) : inner_(inner), m_(m) {}
  std::vector<std::string> similar(const std::string& word) override {
    std::lock_guard lock(m_);
    return inner_.similar(word);
  }

 private:
  SimilarityPort& inner_;
  std::mutex& m_;
};

class LockedTranslator final : public TranslatorPort {
 public:
  LockedTranslator(TranslatorPort& inner, std::mutex& m) : inner_(inner), m_(m) {}
  std::string forward(const std::string& text) override {
    std::lock_guard lock(m_);
    return inner_.forward(text);
  }
  std::string reverse(const std::string& text) override {
    std::lock_guard lock(m_);
    return inner_.reverse(text);
  }

 private:
  TranslatorPort& inner_;
  std::mutex& m_;
};

}  // namespace

const std::vector<std::string>& default_header_lexicon() {
  static const std::vector<std::string> lexicon = {
      "education", "educations", "academic background", "education and training",
      "experience", "experiences", "work experience", "professional experience",
      "employment", "employment history", "work history", "career history",
      "skill", "skills", "technical skills", "skills and tools", "competencies",
      "personal", "personal profile", "personal information", "personal details",
      "profile", "contact", "contact information",
      "language", "languages", "language skills",
  };
  return lexicon;
}

const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a", "an", "the", "and", "or", "but", "nor", "so", "yet", "for", "of", "in",
      "on", "at", "to", "by", "with", "from", "as", "into", "onto", "about", "over",
      "under", "between", "through", "during", "while", "if", "than", "that", "then",
      "also", "both", "either", "neither", "whether", "because", "although", "though",
      "per", "via", "within", "without", "upon", "among",
  };
  return words;
}

NormalizationRules NormalizationRules::defaults() {
  NormalizationRules r;
  r.header_lexicon.insert(default_header_lexicon().begin(), default_header_lexicon().end());
  r.stopwords.insert(default_stopwords().begin(), default_stopwords().end());
  return r;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open word list " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string w = utf8::join(utf8::split_whitespace(line));
    if (w.empty() || w.front() == '#') continue;
    words.push_back(w);
  }
  return words;
}

NormalizationRules NormalizationRules::from_files(const std::filesystem::path& header_lexicon,
                                                  const std::filesystem::path& stopwords) {
  NormalizationRules r = defaults();
  if (!header_lexicon.empty()) {
    const auto words = load_word_list(header_lexicon);
    r.header_lexicon = {words.begin(), words.end()};
  }
  if (!stopwords.empty()) {
    const auto words = load_word_list(stopwords);
    r.stopwords = {words.begin(), words.end()};
  }
  return r;
}

std::string lowercase(std::string_view text) {
  std::u32string cps = utf8::decode(text);
  for (auto& c : cps) c = to_lower(c);
  return utf8::encode(cps);
}

std::string normalize(std::string_view text, const NormalizationRules& rules) {
  auto words = remove_stopwords(fold_words(text, rules.lowercase, rules.strip_punctuation),
                                rules.stopwords);

  // Lexicon entries go through the same folding so "Skills & Tools" matches "skills tools".
  std::vector<std::vector<std::string>> headers;
  for (const auto& entry : rules.header_lexicon) {
    auto h = remove_stopwords(fold_words(entry, rules.lowercase, rules.strip_punctuation),
                              rules.stopwords);
    if (!h.empty()) headers.push_back(std::move(h));
  }
  std::sort(headers.begin(), headers.end(),
            [](const auto& a, const auto& b) { return a.size() > b.size(); });

  std::size_t start = 0;
  for (bool matched = true; matched;) {
    matched = false;
    for (const auto& h : headers) {
      if (start + h.size() <= words.size() &&
          std::equal(h.begin(), h.end(), words.begin() + static_cast<std::ptrdiff_t>(start))) {
        start += h.size();
        matched = true;
        break;
      }
    }
  }
  words.erase(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(start));
  return utf8::join(words);
}

// --- augmentation -----------------------------------------------------------

std::string_view strategy_name(AugmentStrategy s) {
  switch (s) {
    case AugmentStrategy::char_delete: return "char_delete";
    case AugmentStrategy::char_substitute: return "char_substitute";
    case AugmentStrategy::word_insert: return "word_insert";
    case AugmentStrategy::contextual_substitute: return "contextual_substitute";
    case AugmentStrategy::back_translate: return "back_translate";
  }
  return "unknown";
}

void AugmentPlan::validate() const {
  if (factor < 1) throw PreconditionError("augmentation factor must be >= 1");
  double sum = 0.0;
  for (double w : strategy_mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw PreconditionError("strategy weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw PreconditionError("strategy weights must not all be zero");
}

TableSimilarity::TableSimilarity(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open similarity table " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected word<TAB>candidates");
    }
    table_.emplace_back(line.substr(0, tab), utf8::split_whitespace(line.substr(tab + 1)));
  }
  std::stable_sort(table_.begin(), table_.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
}

std::vector<std::string> TableSimilarity::similar(const std::string& word) {
  const auto it = std::lower_bound(table_.begin(), table_.end(), word,
                                   [](const auto& e, const std::string& w) { return e.first < w; });
  if (it == table_.end() || it->first != word) return {};
  return it->second;
}

std::vector<std::string> build_vocabulary(const std::vector<SectionRecord>& records) {
  std::set<std::string> vocab;
  for (const auto& r : records) {
    for (auto& w : utf8::split_whitespace(working_text(r))) vocab.insert(std::move(w));
  }
  return {vocab.begin(), vocab.end()};
}

std::string delete_chars(std::string_view text, const std::vector<std::size_t>& positions) {
  std::u32string cps = utf8::decode(text);
  std::vector<bool> drop(cps.size(), false);
  for (std::size_t p : positions) {
    if (p < drop.size()) drop[p] = true;
  }
  std::u32string out;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!drop[i]) out.push_back(cps[i]);
  }
  return utf8::encode(out);
}

std::string char_delete(std::string_view text, double rate, std::mt19937_64& rng) {
  const std::u32string cps = utf8::decode(text);
  const auto candidates = non_space_positions(cps);
  const std::size_t k = std::max<std::size_t>(candidates.empty() ? 0 : 1, ceil_count(rate, candidates.size()));
  std::vector<std::size_t> chosen;
  for (std::size_t i : sample_positions(candidates.size(), k, rng)) chosen.push_back(candidates[i]);
  return utf8::join(utf8::split_whitespace(delete_chars(text, chosen)));
}

std::string char_substitute(std::string_view text, double rate, std::mt19937_64& rng) {
  std::u32string cps = utf8::decode(text);
  const auto candidates = non_space_positions(cps);
  const std::size_t k = std::max<std::size_t>(candidates.empty() ? 0 : 1, ceil_count(rate, candidates.size()));
  std::uniform_int_distribution<int> letter(0, 24);
  for (std::size_t i : sample_positions(candidates.size(), k, rng)) {
    char32_t& c = cps[candidates[i]];
    // 25 letters other than c itself (when c is a lowercase letter)
    char32_t repl = U'a' + static_cast<char32_t>(letter(rng));
    if (c >= U'a' && c <= U'z' && repl >= c) ++repl;
    c = repl;
  }
  return utf8::encode(cps);
}

std::string word_insert(std::string_view text, const std::vector<std::string>& vocabulary,
                        double rate, std::mt19937_64& rng) {
  auto words = utf8::split_whitespace(text);
  if (vocabulary.empty()) return utf8::join(words);
  const std::size_t k = std::max<std::size_t>(1, ceil_count(rate, words.size()));
  std::uniform_int_distribution<std::size_t> pick_word(0, vocabulary.size() - 1);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick_slot(0, words.size());
    const auto slot = pick_slot(rng);
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(slot), vocabulary[pick_word(rng)]);
  }
  return utf8::join(words);
}

std::string contextual_substitute(std::string_view text, SimilarityPort& port, double rate,
                                  std::mt19937_64& rng) {
  auto words = utf8::split_whitespace(text);
  const std::size_t k = ceil_count(rate, words.size());
  if (k == 0) return utf8::join(words);

  std::vector<std::size_t> eligible;
  std::vector<std::vector<std::string>> candidates(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    try {
      candidates[i] = port.similar(words[i]);
    } catch (const std::exception& e) {
      throw PortError(std::string("similarity port failed: ") + e.what());
    }
    if (candidates[i].size() > kMaxSimilarCandidates) candidates[i].resize(kMaxSimilarCandidates);
    if (!candidates[i].empty()) eligible.push_back(i);
  }
  for (std::size_t e : sample_positions(eligible.size(), std::min(k, eligible.size()), rng)) {
    const std::size_t i = eligible[e];
    std::uniform_int_distribution<std::size_t> pick(0, candidates[i].size() - 1);
    words[i] = candidates[i][pick(rng)];
  }
  return utf8::join(words);
}

std::string back_translate(std::string_view text, TranslatorPort& port) {
  if (utf8::split_whitespace(text).empty()) return {};
  try {
    return utf8::join(utf8::split_whitespace(port.reverse(port.forward(std::string(text)))));
  } catch (const std::exception& e) {
    throw PortError(std::string("translator port failed: ") + e.what());
  }
}

SectionRecord augment_record(const SectionRecord& record, const AugmentPlan& plan, int copy_index,
                             const AugmentContext& ctx) {
  plan.validate();
  const std::string& source = working_text(record);
  if (source.empty()) throw PreconditionError("cannot augment empty record " + record.record_id);

  std::mt19937_64 rng(derive_seed(plan.seed, record.record_id, static_cast<std::uint64_t>(copy_index)));
  std::discrete_distribution<int> pick(plan.strategy_mix.begin(), plan.strategy_mix.end());
  const auto strategy = static_cast<AugmentStrategy>(pick(rng));

  std::string text;
  switch (strategy) {
    case AugmentStrategy::char_delete:
      text = char_delete(source, plan.rates.char_rate, rng);
      break;
    case AugmentStrategy::char_substitute:
      text = char_substitute(source, plan.rates.char_rate, rng);
      break;
    case AugmentStrategy::word_insert:
      text = word_insert(source, ctx.vocabulary, plan.rates.insert_rate, rng);
      break;
    case AugmentStrategy::contextual_substitute:
      if (!ctx.similarity) throw PortError("contextual_substitute selected but no similarity port is configured");
      text = contextual_substitute(source, *ctx.similarity, plan.rates.substitute_rate, rng);
      break;
    case AugmentStrategy::back_translate:
      if (!ctx.translator) throw PortError("back_translate selected but no translator port is configured");
      text = back_translate(source, *ctx.translator);
      break;
  }
  // char_delete on a one-letter text can leave nothing; keep the record valid
  if (text.empty()) text = source;

  SectionRecord out = record;
  out.record_id = record.record_id + "#aug" + std::to_string(copy_index);
  if (record.normalized_text) {
    out.normalized_text = text;
  }
  out.text = std::move(text);
  return out;
}

std::vector<SectionRecord> augment_dataset(const std::vector<SectionRecord>& records,
                                           const AugmentPlan& plan, AugmentContext ctx, int jobs) {
  plan.validate();
  if (ctx.vocabulary.empty()) ctx.vocabulary = build_vocabulary(records);

  const auto factor = static_cast<std::size_t>(plan.factor);
  std::vector<SectionRecord> out(records.size() * factor);

  std::mutex port_mutex;
  std::optional<LockedSimilarity> locked_sim;
  std::optional<LockedTranslator> locked_tr;
  if (jobs > 1) {
    if (ctx.similarity) ctx.similarity = &locked_sim.emplace(*ctx.similarity, port_mutex);
    if (ctx.translator) ctx.translator = &locked_tr.emplace(*ctx.translator, port_mutex);
  }

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i * factor] = records[i];
      for (std::size_t k = 1; k < factor; ++k) {
        out[i * factor + k] = augment_record(records[i], plan, static_cast<int>(k), ctx);
      }
    }
  };

  const std::size_t n_jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1,
                                                     std::max<std::size_t>(records.size(), 1));
  if (n_jobs == 1) {
    work(0, records.size());
    return out;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(n_jobs);
  const std::size_t chunk = (records.size() + n_jobs - 1) / n_jobs;
  for (std::size_t j = 0; j < n_jobs; ++j) {
    const std::size_t b = std::min(records.size(), j * chunk);
    const std::size_t e = std::min(records.size(), b + chunk);
    threads.emplace_back([&, j, b, e] {
      try {
        work(b, e);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

}  // namespace resume_ie
