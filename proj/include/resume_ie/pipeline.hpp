// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end orchestration: ingest -> detect -> crop + OCR (or mined text) ->
// normalize -> classify, plus the structured output document and reports.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resume_ie/classify.hpp"
#include "resume_ie/detect.hpp"
#include "resume_ie/ingest.hpp"
#include "resume_ie/metrics.hpp"
#include "resume_ie/ocr.hpp"
#include "resume_ie/textprep.hpp"
#include "resume_ie/tokenizers.hpp"

namespace resume_ie {

inline constexpr const char* kExtractionSchemaVersion = "1.0";
inline constexpr const char* kModelDirEnv = "RESUME_IE_MODEL_DIR";

struct PipelineConfig {
  std::filesystem::path detector;
  std::filesystem::path recognizer;
  std::filesystem::path backbone;
  std::filesystem::path head;
  std::filesystem::path vocab;
  std::filesystem::path merges;     // byte_bpe only
  std::filesystem::path stopwords;  // optional, shipped list otherwise
  std::filesystem::path headers;    // optional, shipped lexicon otherwise
  std::filesystem::path model_dir;  // root for relative artifact paths
  std::string tokenizer = "bert";
  std::optional<Pooling> pooling;   // family default when absent
  double conf_threshold = kDefaultConfThreshold;
  double iou_threshold = kDefaultNmsIou;
  int margin = kDefaultCropMargin;
  int dpi = kDefaultDpi;
  bool prefer_mined = false;
  bool merge_labels = false;
  bool deterministic = false;

  /// Relative artifact paths that do not exist as given are looked up under
  /// model_dir, then under $RESUME_IE_MODEL_DIR.
  void resolve_paths();
  /// Throws PreconditionError naming every missing file or bad threshold.
  void validate() const;
  Pooling effective_pooling() const;
};

/// A failure tied to one pipeline stage (config, ingest, mine, detect, ocr,
/// classify) and, where known, a page and region.
class StageError : public Error {
 public:
  StageError(std::string stage, std::optional<int> page, std::optional<int> region, const std::string& message);
  const std::string& stage() const { return stage_; }
  std::optional<int> page() const { return page_; }
  std::optional<int> region() const { return region_; }
  const std::string& message() const { return message_; }

 private:
  std::string stage_;
  std::optional<int> page_;
  std::optional<int> region_;
  std::string message_;
};

struct ExtractedSection {
  ClassLabel label = ClassLabel::education;
  std::array<double, kNumClasses> probabilities{};
  std::string text;
  std::vector<Box> boxes;  // original page coordinates
  int page = 0;
  std::optional<double> ocr_confidence;
};

struct ResumeExtraction {
  std::string document_id;
  std::vector<ExtractedSection> sections;
  std::string source = "ocr";  // "ocr" or "mined"
  std::vector<double> ocr_confidences;  // every recognized region, reading order
  std::optional<std::string> timestamp;
};

/// Loaded ports and artifacts for one worker.
class PipelineSession {
 public:
  /// Validates the config, then loads every artifact. Errors are StageError
  /// with stage "config".
  static PipelineSession open(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  DetectorPort& detector() { return *detector_; }
  RecognizerPort& recognizer() { return *recognizer_; }
  EmbeddingPort& embedding() { return *embedding_; }
  const Tokenizer& tokenizer() const { return *tokenizer_; }
  const ClassifierHead& head() const { return head_; }
  const NormalizationRules& rules() const { return rules_; }

  RenderPort* renderer = nullptr;
  TextMinerPort* miner = nullptr;

 private:
  PipelineConfig config_;
  std::unique_ptr<DetectorPort> detector_;
  std::unique_ptr<RecognizerPort> recognizer_;
  std::unique_ptr<EmbeddingPort> embedding_;
  std::unique_ptr<Tokenizer> tokenizer_;
  ClassifierHead head_;
  NormalizationRules rules_;
};

/// Runs one document. Any failure surfaces as StageError.
ResumeExtraction run_pipeline(const std::filesystem::path& document, PipelineSession& session);

/// Adjacent sections (same page) with the same label joined in order.
std::vector<ExtractedSection> merge_adjacent_labels(const std::vector<ExtractedSection>& sections);

struct DocumentOutcome {
  std::optional<ResumeExtraction> extraction;
  std::optional<StageError> error;
};

/// Processes documents on up to `jobs` workers, each opening its own
/// session; results keep input order.
std::vector<DocumentOutcome> run_batch(const std::vector<std::filesystem::path>& documents,
                                       const PipelineConfig& config, int jobs = 1);

// --- output documents -------------------------------------------------------

nlohmann::ordered_json to_json(const ResumeExtraction& extraction, const PipelineConfig& config);
nlohmann::ordered_json failure_report(const std::string& document_id, const StageError& error);

/// Structural check of an extraction document; empty when valid.
std::vector<std::string> validate_extraction(const nlohmann::json& doc);

// --- text datasets and reports ----------------------------------------------

/// Classifier input for a record: normalized_text when present, else the
/// normalized raw text.
std::string classifier_text(const SectionRecord& record, const NormalizationRules& rules);

std::vector<TokenSequence> encode_records(const std::vector<SectionRecord>& records, const Tokenizer& tokenizer,
                                          const NormalizationRules& rules);
std::vector<int> label_ids(const std::vector<SectionRecord>& records);

nlohmann::ordered_json f1_report_json(const F1Report& report, const ConfusionMatrix& cm);
nlohmann::ordered_json detection_eval_json(const DetectionEval& eval);
nlohmann::ordered_json history_json(const TrainResult& result);

/// Plain-text rendering of an eval-text or eval-detect report.
std::string render_report(const nlohmann::json& report);

}  // namespace resume_ie
