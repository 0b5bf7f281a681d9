// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "resume_ie/reference_ports.hpp"
#include "resume_ie/utf8.hpp"

namespace resume_ie {

namespace fs = std::filesystem;

// --- config -----------------------------------------------------------------

namespace {

fs::path resolve_one(const fs::path& p, const fs::path& model_dir, const char* env_dir) {
  if (p.empty() || p.is_absolute() || fs::exists(p)) return p;
  if (!model_dir.empty() && fs::exists(model_dir / p)) return model_dir / p;
  if (env_dir && *env_dir && fs::exists(fs::path(env_dir) / p)) return fs::path(env_dir) / p;
  return p;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

}  // namespace

void PipelineConfig::resolve_paths() {
  const char* env = std::getenv(kModelDirEnv);
  for (fs::path* p : {&detector, &recognizer, &backbone, &head, &vocab, &merges, &stopwords, &headers}) {
    *p = resolve_one(*p, model_dir, env);
  }
}

void PipelineConfig::validate() const {
  std::vector<std::string> problems;
  auto need = [&](const fs::path& p, const char* what) {
    if (p.empty()) {
      problems.push_back(std::string(what) + " path not set");
    } else if (!fs::is_regular_file(p)) {
      problems.push_back(std::string(what) + " file not found: " + p.string());
    }
  };
  need(detector, "detector");
  need(recognizer, "recognizer");
  need(backbone, "backbone");
  need(head, "head");
  need(vocab, "vocab");
  try {
    if (scheme_for_model(tokenizer) == TokenizerScheme::byte_bpe) need(merges, "merges");
  } catch (const Error& e) {
    problems.push_back(e.what());
  }
  if (!stopwords.empty() && !fs::is_regular_file(stopwords)) problems.push_back("stopwords file not found: " + stopwords.string());
  if (!headers.empty() && !fs::is_regular_file(headers)) problems.push_back("headers file not found: " + headers.string());
  if (!(conf_threshold >= 0.0 && conf_threshold <= 1.0)) problems.push_back("conf threshold must be in [0, 1]");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) problems.push_back("iou threshold must be in (0, 1]");
  if (margin < 0) problems.push_back("margin must be >= 0");
  if (dpi < 1) problems.push_back("dpi must be positive");
  if (problems.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw PreconditionError(msg);
}

Pooling PipelineConfig::effective_pooling() const { return pooling ? *pooling : default_pooling(tokenizer); }

StageError::StageError(std::string stage, std::optional<int> page, std::optional<int> region,
                       const std::string& message)
    : Error(stage + " stage failed" + (page ? " on page " + std::to_string(*page) : std::string()) +
            (region ? ", region " + std::to_string(*region) : std::string()) + ": " + message),
      stage_(std::move(stage)),
      page_(page),
      region_(region),
      message_(message) {}

// --- session ----------------------------------------------------------------

PipelineSession PipelineSession::open(PipelineConfig config) {
  PipelineSession s;
  try {
    config.resolve_paths();
    config.validate();
    s.detector_ = load_detector(config.detector);
    s.recognizer_ = load_recognizer(config.recognizer);
    s.embedding_ = load_embedding(config.backbone);
    s.tokenizer_ = build_tokenizer(config.tokenizer, TokenizerFiles{config.vocab, config.merges});
    s.head_ = load_head(config.head);
    if (s.head_.input_dim() != s.embedding_->hidden_dim()) {
      throw PreconditionError("head expects " + std::to_string(s.head_.input_dim()) + "-wide embeddings, backbone gives " +
                              std::to_string(s.embedding_->hidden_dim()));
    }
    s.rules_ = NormalizationRules::defaults();
    if (!config.headers.empty() || !config.stopwords.empty()) {
      NormalizationRules custom = NormalizationRules::from_files(config.headers, config.stopwords);
      if (!config.headers.empty()) s.rules_.header_lexicon = custom.header_lexicon;
      if (!config.stopwords.empty()) s.rules_.stopwords = custom.stopwords;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("config", std::nullopt, std::nullopt, e.what());
  }
  s.config_ = std::move(config);
  return s;
}

// --- run --------------------------------------------------------------------

namespace {

ExtractedSection classify_text(const std::string& text, PipelineSession& session, int page, int region) {
  ExtractedSection sec;
  try {
    const Prediction p = predict(text, session.tokenizer(), session.embedding(), session.config().effective_pooling(),
                                 session.head(), session.rules());
    sec.label = p.label;
    for (int c = 0; c < kNumClasses; ++c) sec.probabilities[static_cast<std::size_t>(c)] = p.probabilities(c);
  } catch (const std::exception& e) {
    throw StageError("classify", page, region, e.what());
  }
  sec.text = text;
  sec.page = page;
  return sec;
}

}  // namespace

ResumeExtraction run_pipeline(const fs::path& document, PipelineSession& session) {
  const PipelineConfig& cfg = session.config();
  ResumeExtraction out;
  out.document_id = document.filename().string();
  if (!cfg.deterministic) out.timestamp = utc_timestamp();

  DocumentKind kind;
  try {
    if (!fs::is_regular_file(document)) throw Error("cannot read " + document.string());
    kind = detect_document_kind(document);
  } catch (const std::exception& e) {
    throw StageError("ingest", std::nullopt, std::nullopt, e.what());
  }

  if (cfg.prefer_mined && (kind == DocumentKind::pdf || kind == DocumentKind::doc)) {
    std::vector<RawTextBlock> blocks;
    try {
      blocks = mine_text(document, session.miner);
    } catch (const std::exception& e) {
      throw StageError("mine", std::nullopt, std::nullopt, e.what());
    }
    if (!blocks.empty()) {
      out.source = "mined";
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blank(blocks[i].text)) continue;
        ExtractedSection sec = classify_text(blocks[i].text, session, blocks[i].page, static_cast<int>(i));
        if (blocks[i].bbox) sec.boxes.push_back(*blocks[i].bbox);
        out.sections.push_back(std::move(sec));
      }
      if (cfg.merge_labels) out.sections = merge_adjacent_labels(out.sections);
      return out;
    }
  }

  std::vector<PageImage> pages;
  try {
    pages = rasterize(document, cfg.dpi, session.renderer);
  } catch (const std::exception& e) {
    throw StageError("ingest", std::nullopt, std::nullopt, e.what());
  }

  for (const PageImage& page : pages) {
    const int page_no = page.source_page;
    std::vector<TextRegion> regions;
    try {
      regions = reading_order(nms(decode(session.detector().infer(page), cfg.conf_threshold), cfg.iou_threshold));
    } catch (const std::exception& e) {
      throw StageError("detect", page_no, std::nullopt, e.what());
    }
    std::vector<OcrResult> texts;
    try {
      texts = recognize(page, regions, session.recognizer(), cfg.margin);
    } catch (const RecognitionError& e) {
      throw StageError("ocr", page_no, e.region_index(), e.what());
    } catch (const std::exception& e) {
      throw StageError("ocr", page_no, std::nullopt, e.what());
    }
    for (std::size_t i = 0; i < texts.size(); ++i) {
      out.ocr_confidences.push_back(texts[i].mean_confidence);
      if (blank(texts[i].text)) continue;
      ExtractedSection sec = classify_text(texts[i].text, session, page_no, static_cast<int>(i));
      sec.boxes.push_back(unletterbox(texts[i].region.box, page));
      sec.ocr_confidence = texts[i].mean_confidence;
      out.sections.push_back(std::move(sec));
    }
  }
  if (cfg.merge_labels) out.sections = merge_adjacent_labels(out.sections);
  return out;
}

std::vector<ExtractedSection> merge_adjacent_labels(const std::vector<ExtractedSection>& sections) {
  std::vector<ExtractedSection> out;
  std::vector<int> counts;
  for (const auto& s : sections) {
    if (!out.empty() && out.back().label == s.label && out.back().page == s.page) {
      auto& m = out.back();
      const int n = ++counts.back();
      m.text += " " + s.text;
      m.boxes.insert(m.boxes.end(), s.boxes.begin(), s.boxes.end());
      for (std::size_t c = 0; c < m.probabilities.size(); ++c) {
        m.probabilities[c] += (s.probabilities[c] - m.probabilities[c]) / n;
      }
      if (m.ocr_confidence && s.ocr_confidence) {
        *m.ocr_confidence += (*s.ocr_confidence - *m.ocr_confidence) / n;
      }
      continue;
    }
    out.push_back(s);
    counts.push_back(1);
  }
  return out;
}

std::vector<DocumentOutcome> run_batch(const std::vector<fs::path>& documents, const PipelineConfig& config,
                                       int jobs) {
  std::vector<DocumentOutcome> out(documents.size());
  if (documents.empty()) return out;
  const int workers = std::clamp(jobs, 1, static_cast<int>(documents.size()));
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    std::optional<PipelineSession> session;
    std::optional<StageError> open_error;
    try {
      session.emplace(PipelineSession::open(config));
    } catch (const StageError& e) {
      open_error = e;
    }
    for (std::size_t i = next++; i < documents.size(); i = next++) {
      if (open_error) {
        out[i].error = *open_error;
        continue;
      }
      try {
        out[i].extraction = run_pipeline(documents[i], *session);
      } catch (const StageError& e) {
        out[i].error = e;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

// --- output documents -------------------------------------------------------

nlohmann::ordered_json to_json(const ResumeExtraction& ex, const PipelineConfig& config) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["schema_version"] = kExtractionSchemaVersion;
  doc["document_id"] = ex.document_id;
  doc["status"] = "ok";
  ordered_json sections = ordered_json::array();
  for (const auto& s : ex.sections) {
    ordered_json j;
    j["label"] = std::string(class_name(s.label));
    j["probabilities"] = s.probabilities;
    j["text"] = s.text;
    ordered_json boxes = ordered_json::array();
    for (const auto& b : s.boxes) boxes.push_back({b.x1, b.y1, b.x2, b.y2});
    j["boxes"] = boxes;
    j["page"] = s.page;
    j["ocr_confidence"] = s.ocr_confidence ? ordered_json(*s.ocr_confidence) : ordered_json(nullptr);
    sections.push_back(std::move(j));
  }
  doc["sections"] = std::move(sections);

  ordered_json meta;
  meta["classes"] = ordered_json::array();
  for (ClassLabel c : all_classes()) meta["classes"].push_back(std::string(class_name(c)));
  meta["models"] = {{"detector", config.detector.filename().string()},
                    {"recognizer", config.recognizer.filename().string()},
                    {"backbone", config.backbone.filename().string()},
                    {"head", config.head.filename().string()},
                    {"tokenizer", config.tokenizer}};
  meta["pooling"] = std::string(pooling_name(config.effective_pooling()));
  meta["thresholds"] = {{"conf", config.conf_threshold},
                        {"iou", config.iou_threshold},
                        {"margin", config.margin},
                        {"dpi", config.dpi}};
  meta["source"] = ex.source;
  meta["merge_labels"] = config.merge_labels;
  meta["ocr_confidences"] = ex.ocr_confidences;
  if (ex.timestamp) meta["timestamp"] = *ex.timestamp;
  doc["pipeline_meta"] = std::move(meta);
  return doc;
}

nlohmann::ordered_json failure_report(const std::string& document_id, const StageError& error) {
  nlohmann::ordered_json j;
  j["schema_version"] = kExtractionSchemaVersion;
  j["document_id"] = document_id;
  j["status"] = "error";
  j["stage"] = error.stage();
  j["page"] = error.page() ? nlohmann::ordered_json(*error.page()) : nlohmann::ordered_json(nullptr);
  j["region"] = error.region() ? nlohmann::ordered_json(*error.region()) : nlohmann::ordered_json(nullptr);
  j["message"] = error.message();
  return j;
}

std::vector<std::string> validate_extraction(const nlohmann::json& doc) {
  std::vector<std::string> errs;
  auto fail = [&](const std::string& m) { errs.push_back(m); };
  if (!doc.is_object()) {
    fail("document is not an object");
    return errs;
  }
  auto require = [&](const nlohmann::json& obj, const char* key, auto pred, const char* what,
                     const std::string& where) {
    if (!obj.contains(key)) {
      fail(where + key + " missing");
      return false;
    }
    if (!pred(obj.at(key))) {
      fail(where + key + " must be " + what);
      return false;
    }
    return true;
  };
  const auto is_string = [](const nlohmann::json& j) { return j.is_string(); };
  const auto is_array = [](const nlohmann::json& j) { return j.is_array(); };
  const auto is_object = [](const nlohmann::json& j) { return j.is_object(); };
  const auto is_number = [](const nlohmann::json& j) { return j.is_number(); };

  if (require(doc, "schema_version", is_string, "a string", "") && doc["schema_version"] != kExtractionSchemaVersion) {
    fail("schema_version must be " + std::string(kExtractionSchemaVersion));
  }
  require(doc, "document_id", is_string, "a string", "");
  if (require(doc, "status", is_string, "a string", "") && doc["status"] != "ok") fail("status must be \"ok\"");

  if (require(doc, "sections", is_array, "an array", "")) {
    for (std::size_t i = 0; i < doc["sections"].size(); ++i) {
      const auto& s = doc["sections"][i];
      const std::string where = "sections[" + std::to_string(i) + "].";
      if (!s.is_object()) {
        fail(where + " not an object");
        continue;
      }
      if (require(s, "label", is_string, "a string", where) &&
          !class_from_name(s["label"].get<std::string>())) {
        fail(where + "label '" + s["label"].get<std::string>() + "' is not a class");
      }
      if (require(s, "probabilities", is_array, "an array", where)) {
        const auto& p = s["probabilities"];
        if (p.size() != static_cast<std::size_t>(kNumClasses)) {
          fail(where + "probabilities must have 5 entries");
        } else {
          double sum = 0.0;
          bool ok = true;
          for (const auto& v : p) {
            if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 1.0) ok = false;
            else sum += v.get<double>();
          }
          if (!ok) fail(where + "probabilities must be numbers in [0, 1]");
          else if (std::abs(sum - 1.0) > 1e-6) fail(where + "probabilities must sum to 1");
        }
      }
      require(s, "text", is_string, "a string", where);
      if (require(s, "boxes", is_array, "an array", where)) {
        for (const auto& b : s["boxes"]) {
          bool ok = b.is_array() && b.size() == 4 && std::all_of(b.begin(), b.end(), is_number);
          if (ok) ok = b[0].get<double>() <= b[2].get<double>() && b[1].get<double>() <= b[3].get<double>();
          if (!ok) fail(where + "boxes entries must be [x1, y1, x2, y2] with x1 <= x2, y1 <= y2");
        }
      }
      if (require(s, "page", [](const nlohmann::json& j) { return j.is_number_integer(); }, "an integer", where) &&
          s["page"].get<long long>() < 0) {
        fail(where + "page must be >= 0");
      }
      if (s.contains("ocr_confidence") && !s["ocr_confidence"].is_null() && !s["ocr_confidence"].is_number()) {
        fail(where + "ocr_confidence must be a number or null");
      }
    }
  }

  if (require(doc, "pipeline_meta", is_object, "an object", "")) {
    const auto& m = doc["pipeline_meta"];
    require(m, "models", is_object, "an object", "pipeline_meta.");
    require(m, "thresholds", is_object, "an object", "pipeline_meta.");
    require(m, "ocr_confidences", is_array, "an array", "pipeline_meta.");
    if (m.contains("timestamp") && !m["timestamp"].is_string()) fail("pipeline_meta.timestamp must be a string");
  }
  return errs;
}

// --- text datasets and reports ----------------------------------------------

std::string classifier_text(const SectionRecord& record, const NormalizationRules& rules) {
  return record.normalized_text ? *record.normalized_text : normalize(record.text, rules);
}

std::vector<TokenSequence> encode_records(const std::vector<SectionRecord>& records, const Tokenizer& tokenizer,
                                          const NormalizationRules& rules) {
  std::vector<TokenSequence> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(tokenizer.encode(classifier_text(r, rules)));
  return out;
}

std::vector<int> label_ids(const std::vector<SectionRecord>& records) {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(class_id(r.label));
  return out;
}

nlohmann::ordered_json f1_report_json(const F1Report& report, const ConfusionMatrix& cm) {
  nlohmann::ordered_json j;
  j["kind"] = "text";
  j["classes"] = nlohmann::ordered_json::array();
  for (ClassLabel c : all_classes()) j["classes"].push_back(std::string(class_name(c)));
  j["confusion"] = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < cm.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < cm.cols(); ++c) row.push_back(cm(r, c));
    j["confusion"].push_back(std::move(row));
  }
  j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    j["per_class"].push_back({{"class", c < static_cast<std::size_t>(kNumClasses)
                                            ? std::string(class_name(class_from_id(static_cast<int>(c))))
                                            : std::to_string(c)},
                              {"precision", s.precision},
                              {"recall", s.recall},
                              {"f1", s.f1},
                              {"support", s.support}});
  }
  j["f1_micro"] = report.micro;
  j["f1_macro"] = report.macro;
  j["f1_weighted"] = report.weighted;
  return j;
}

nlohmann::ordered_json detection_eval_json(const DetectionEval& eval) {
  nlohmann::ordered_json j;
  j["kind"] = "detection";
  j["iou_thresholds"] = coco_iou_thresholds();
  j["per_class"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < eval.class_ids.size(); ++i) {
    double mean = 0.0;
    for (double v : eval.ap[i]) mean += v;
    j["per_class"].push_back({{"class_id", eval.class_ids[i]},
                              {"ap", eval.ap[i]},
                              {"ap50", eval.ap[i][0]},
                              {"ap50_95", mean / static_cast<double>(eval.ap[i].size())}});
  }
  j["map50"] = eval.map50;
  j["map50_95"] = eval.map50_95;
  return j;
}

nlohmann::ordered_json history_json(const TrainResult& result) {
  nlohmann::ordered_json j;
  j["best_epoch"] = result.best_epoch;
  j["class_weights"] = result.weights.weights;
  j["history"] = nlohmann::ordered_json::array();
  for (const auto& e : result.history) {
    j["history"].push_back({{"epoch", e.epoch},
                            {"train_loss", e.train_loss},
                            {"val_loss", e.val_loss},
                            {"val_f1_macro", e.val_f1_macro},
                            {"val_f1_micro", e.val_f1_micro},
                            {"val_f1_weighted", e.val_f1_weighted}});
  }
  return j;
}

std::string render_report(const nlohmann::json& report) {
  if (!report.is_object() || !report.contains("kind")) throw FormatError("report has no 'kind'");
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  const std::string kind = report["kind"].get<std::string>();
  if (kind == "text") {
    out << "class         precision  recall     f1         support\n";
    for (const auto& c : report.at("per_class")) {
      out << std::left << std::setw(14) << c.at("class").get<std::string>() << std::right << std::setw(9)
          << c.at("precision").get<double>() << "  " << std::setw(9) << c.at("recall").get<double>() << "  "
          << std::setw(9) << c.at("f1").get<double>() << "  " << std::setw(7) << c.at("support").get<long long>()
          << "\n";
    }
    out << "\nF1 micro     " << report.at("f1_micro").get<double>() << "\n";
    out << "F1 macro     " << report.at("f1_macro").get<double>() << "\n";
    out << "F1 weighted  " << report.at("f1_weighted").get<double>() << "\n";
    out << "\nconfusion (rows true, cols predicted)\n";
    for (const auto& row : report.at("confusion")) {
      for (const auto& v : row) out << std::setw(6) << v.get<long long>();
      out << "\n";
    }
  } else if (kind == "detection") {
    out << "class  AP50       AP50-95\n";
    for (const auto& c : report.at("per_class")) {
      out << std::left << std::setw(7) << c.at("class_id").get<int>() << std::right << std::setw(6)
          << c.at("ap50").get<double>() << "     " << c.at("ap50_95").get<double>() << "\n";
    }
    out << "\nmAP50     " << report.at("map50").get<double>() << "\n";
    out << "mAP50-95  " << report.at("map50_95").get<double>() << "\n";
  } else {
    throw FormatError("unknown report kind '" + kind + "'");
  }
  return out.str();
}

}  // namespace resume_ie
