// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// resume-ie command line: parse | train-head | eval-text | eval-detect |
// augment | split | export-report
//
// Exit codes: 0 success, 1 a stage or input error, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "resume_ie/classify.hpp"
#include "resume_ie/corpus.hpp"
#include "resume_ie/metrics.hpp"
#include "resume_ie/pipeline.hpp"
#include "resume_ie/reference_ports.hpp"
#include "resume_ie/textprep.hpp"
#include "resume_ie/tokenizers.hpp"
#include "resume_ie/utf8.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::array<double, kNumStrategies> parse_mix(const std::string& text) {
  std::array<double, kNumStrategies> mix{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == mix.size()) throw PreconditionError("--mix takes exactly 5 comma-separated weights");
    try {
      std::size_t used = 0;
      mix[n] = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw PreconditionError("--mix weight '" + item + "' is not a number");
    }
    ++n;
  }
  if (n != mix.size()) throw PreconditionError("--mix takes exactly 5 comma-separated weights");
  return mix;
}

NormalizationRules rules_from(const std::string& headers, const std::string& stopwords) {
  if (headers.empty() && stopwords.empty()) return NormalizationRules::defaults();
  return NormalizationRules::from_files(headers, stopwords);
}

// Options shared by the commands that load a backbone and tokenizer.
struct ModelOptions {
  std::string backbone;
  std::string vocab;
  std::string merges;
  std::string tokenizer = "bert";
  std::string pooling;
  std::string headers;
  std::string stopwords;

  void add(CLI::App* cmd) {
    cmd->add_option("--backbone", backbone, "Backbone model file");
    cmd->add_option("--vocab", vocab, "Tokenizer vocabulary file");
    cmd->add_option("--merges", merges, "Byte-BPE merges file");
    cmd->add_option("--tokenizer", tokenizer, "bert, distilbert, roberta or xlnet")->capture_default_str();
    cmd->add_option("--pooling", pooling, "cls, mean or last (family default when omitted)");
    cmd->add_option("--headers", headers, "Header lexicon file");
    cmd->add_option("--stopwords", stopwords, "Stopword file");
  }

  Pooling effective_pooling() const { return pooling.empty() ? default_pooling(tokenizer) : pooling_from_name(pooling); }
};

// --- parse ------------------------------------------------------------------

struct ParseOptions {
  std::vector<std::string> documents;
  PipelineConfig config;
  std::string detector, recognizer, backbone, head, vocab, merges, stopwords, headers, model_dir, pooling;
  int jobs = 1;
  std::string output;
};

int run_parse(ParseOptions& o) {
  PipelineConfig cfg = o.config;
  cfg.detector = o.detector;
  cfg.recognizer = o.recognizer;
  cfg.backbone = o.backbone;
  cfg.head = o.head;
  cfg.vocab = o.vocab;
  cfg.merges = o.merges;
  cfg.stopwords = o.stopwords;
  cfg.headers = o.headers;
  cfg.model_dir = o.model_dir;
  if (!o.pooling.empty()) cfg.pooling = pooling_from_name(o.pooling);

  std::vector<fs::path> docs(o.documents.begin(), o.documents.end());
  const auto outcomes = run_batch(docs, cfg, o.jobs);

  PipelineConfig resolved = cfg;
  resolved.resolve_paths();
  ordered_json all = ordered_json::array();
  bool failed = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].extraction) {
      all.push_back(to_json(*outcomes[i].extraction, resolved));
    } else {
      failed = true;
      all.push_back(failure_report(docs[i].filename().string(), *outcomes[i].error));
      std::cerr << "resume-ie: " << docs[i].string() << ": " << outcomes[i].error->what() << "\n";
    }
  }
  write_output(o.output, dump(all.size() == 1 ? all[0] : all));
  return failed ? kExitFailure : kExitOk;
}

// --- train-head -------------------------------------------------------------

struct TrainOptions {
  std::string train, val;
  ModelOptions model;
  TrainConfig config;
  std::string out;
  std::string history;
};

int run_train(TrainOptions& o) {
  if (o.model.backbone.empty() || o.model.vocab.empty()) throw PreconditionError("--backbone and --vocab are required");
  const auto train = load_text_dataset(o.train);
  const auto val = load_text_dataset(o.val);
  const auto rules = rules_from(o.model.headers, o.model.stopwords);
  auto tok = build_tokenizer(o.model.tokenizer, {o.model.vocab, o.model.merges});
  auto port = load_embedding(o.model.backbone);
  const TrainResult result = train_head(encode_records(train, *tok, rules), label_ids(train),
                                        encode_records(val, *tok, rules), label_ids(val), *port,
                                        o.model.effective_pooling(), o.config);
  save_head(o.out, result.head);
  const ordered_json hist = history_json(result);
  if (!o.history.empty()) write_output(o.history, dump(hist));
  ordered_json summary;
  summary["head"] = o.out;
  summary["epochs"] = result.history.size();
  summary["best_epoch"] = result.best_epoch;
  summary["best_val_f1_macro"] = result.history.at(static_cast<std::size_t>(result.best_epoch - 1)).val_f1_macro;
  std::cout << dump(summary);
  return kExitOk;
}

// --- eval-text --------------------------------------------------------------

struct EvalTextOptions {
  std::string truth;
  std::string pred;
  std::string head;
  ModelOptions model;
  std::string output;
};

std::unordered_map<std::string, int> load_prediction_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::unordered_map<std::string, int> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw FormatError(where + ": malformed JSON");
    }
    if (!j.is_object() || !j.contains("record_id") || !j.contains("label") || !j["record_id"].is_string() ||
        !j["label"].is_string()) {
      throw FormatError(where + ": expected {\"record_id\": ..., \"label\": ...}");
    }
    const auto label = class_from_name(j["label"].get<std::string>());
    if (!label) throw FormatError(where + ": unknown label '" + j["label"].get<std::string>() + "'");
    if (!out.emplace(j["record_id"].get<std::string>(), class_id(*label)).second) {
      throw FormatError(where + ": duplicate record_id");
    }
  }
  return out;
}

int run_eval_text(EvalTextOptions& o) {
  const auto truth = load_text_dataset(o.truth);
  std::vector<int> predicted;
  if (!o.pred.empty()) {
    const auto preds = load_prediction_labels(o.pred);
    for (const auto& r : truth) {
      const auto it = preds.find(r.record_id);
      if (it == preds.end()) throw PreconditionError("no prediction for record '" + r.record_id + "'");
      predicted.push_back(it->second);
    }
  } else {
    if (o.head.empty() || o.model.backbone.empty() || o.model.vocab.empty()) {
      throw PreconditionError("give --pred, or --head with --backbone and --vocab");
    }
    const auto rules = rules_from(o.model.headers, o.model.stopwords);
    auto tok = build_tokenizer(o.model.tokenizer, {o.model.vocab, o.model.merges});
    auto port = load_embedding(o.model.backbone);
    const auto head = load_head(o.head);
    predicted = predict_ids(head, embed_all(encode_records(truth, *tok, rules), *port, o.model.effective_pooling()));
  }
  const ConfusionMatrix cm = confusion(label_ids(truth), predicted, kNumClasses);
  write_output(o.output, dump(f1_report_json(f1_report(cm), cm)));
  return kExitOk;
}

// --- eval-detect ------------------------------------------------------------

struct EvalDetectOptions {
  std::string labels;
  std::string pred;
  double canvas = kCanvasSize;
  std::string output;
};

int run_eval_detect(EvalDetectOptions& o) {
  const LabelDirectory gts = load_label_directory(o.labels, o.canvas);
  const auto preds = load_predictions(o.pred);
  write_output(o.output, dump(detection_eval_json(map_eval(gts.image_ids, preds, gts.boxes))));
  return kExitOk;
}

// --- augment ----------------------------------------------------------------

struct AugmentOptions {
  std::string input, output;
  AugmentPlan plan;
  std::string mix = "1,1,1,0,0";
  int jobs = 1;
  bool raw = false;
  std::string similarity;
  std::string translator;
  std::string headers, stopwords;
};

int run_augment(AugmentOptions& o) {
  o.plan.strategy_mix = parse_mix(o.mix);
  o.plan.validate();
  auto records = load_text_dataset(o.input);
  if (!o.raw) {
    const auto rules = rules_from(o.headers, o.stopwords);
    for (auto& r : records) r.normalized_text = normalize(r.text, rules);
  }
  std::unique_ptr<SimilarityPort> sim;
  if (!o.similarity.empty()) sim = std::make_unique<TableSimilarity>(o.similarity);
  std::unique_ptr<TranslatorPort> tr;
  if (o.translator == "identity") {
    tr = std::make_unique<IdentityTranslator>();
  } else if (!o.translator.empty()) {
    throw PreconditionError("unknown translator '" + o.translator + "' (only 'identity' is built in)");
  }
  AugmentContext ctx;
  ctx.similarity = sim.get();
  ctx.translator = tr.get();
  const auto out = augment_dataset(records, o.plan, ctx, o.jobs);
  if (o.output.empty() || o.output == "-") {
    std::cout << format_text_dataset(out);
  } else {
    save_text_dataset(o.output, out);
  }
  std::cerr << "augment: " << records.size() << " -> " << out.size() << " records\n";
  return kExitOk;
}

// --- split ------------------------------------------------------------------

struct SplitOptions {
  std::string input;
  SplitRatios ratios;
  std::string by = "person";
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string output;
};

int run_split(SplitOptions& o) {
  if (o.by != "person") throw PreconditionError("--by supports only 'person'");
  const auto records = load_text_dataset(o.input);
  const SplitAssignment a = split_by_person(records, o.ratios, o.seed);
  ordered_json j;
  j["seed"] = o.seed;
  j["ratios"] = {{"train", o.ratios.train}, {"val", o.ratios.val}, {"test", o.ratios.test}};
  j["persons"] = {{"train", a.person_counts[0]}, {"val", a.person_counts[1]}, {"test", a.person_counts[2]}};
  j["records"] = {{"train", a.train.size()}, {"val", a.val.size()}, {"test", a.test.size()}};
  j["train"] = a.train;
  j["val"] = a.val;
  j["test"] = a.test;
  if (!o.out_dir.empty()) {
    fs::create_directories(o.out_dir);
    std::unordered_map<std::string, const SectionRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.record_id, &r);
    auto write = [&](const std::vector<std::string>& ids, const char* name) {
      std::vector<SectionRecord> part;
      for (const auto& id : ids) part.push_back(*by_id.at(id));
      save_text_dataset(fs::path(o.out_dir) / (std::string(name) + ".jsonl"), part);
    };
    write(a.train, "train");
    write(a.val, "val");
    write(a.test, "test");
  }
  write_output(o.output, dump(j));
  return kExitOk;
}

// --- export-report ----------------------------------------------------------

struct ExportOptions {
  std::string input;
  std::string format = "text";
  std::string output;
};

int run_export(ExportOptions& o) {
  std::ifstream in(o.input, std::ios::binary);
  if (!in) throw Error("cannot open " + o.input);
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(o.input + ": " + e.what());
  }
  if (o.format == "json") {
    write_output(o.output, report.dump(2) + "\n");
  } else {
    write_output(o.output, render_report(report));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resume information extraction: detect, recognize and classify resume sections"};
  app.set_config("--config", "", "Key-value config file mirroring the command-line flags");
  app.require_subcommand(1, 1);

  ParseOptions parse;
  auto* cmd_parse = app.add_subcommand("parse", "Extract labeled sections from resume documents");
  cmd_parse->add_option("documents", parse.documents, "Input documents (PNG, JPEG, PDF, DOC)")->required();
  cmd_parse->add_option("--detector", parse.detector, "Detector model file");
  cmd_parse->add_option("--recognizer", parse.recognizer, "Recognizer model file");
  cmd_parse->add_option("--backbone", parse.backbone, "Backbone model file");
  cmd_parse->add_option("--head", parse.head, "Classifier head checkpoint");
  cmd_parse->add_option("--vocab", parse.vocab, "Tokenizer vocabulary file");
  cmd_parse->add_option("--merges", parse.merges, "Byte-BPE merges file");
  cmd_parse->add_option("--stopwords", parse.stopwords, "Stopword file");
  cmd_parse->add_option("--headers", parse.headers, "Header lexicon file");
  cmd_parse->add_option("--model-dir", parse.model_dir, "Root for relative model paths")->envname(kModelDirEnv);
  cmd_parse->add_option("--tokenizer", parse.config.tokenizer, "bert, distilbert, roberta or xlnet")
      ->capture_default_str();
  cmd_parse->add_option("--pooling", parse.pooling, "cls, mean or last");
  cmd_parse->add_option("--conf", parse.config.conf_threshold, "Detection score threshold")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd_parse->add_option("--iou", parse.config.iou_threshold, "NMS IoU threshold")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cmd_parse->add_option("--margin", parse.config.margin, "Crop margin in pixels")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  cmd_parse->add_option("--dpi", parse.config.dpi, "PDF rendering resolution")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd_parse->add_flag("--prefer-mined", parse.config.prefer_mined, "Use the embedded text layer when present");
  cmd_parse->add_flag("--merge-labels", parse.config.merge_labels, "Join adjacent sections with the same label");
  cmd_parse->add_flag("--deterministic", parse.config.deterministic, "Omit the timestamp");
  cmd_parse->add_option("--jobs", parse.jobs, "Parallel documents")->capture_default_str()->check(CLI::PositiveNumber);
  cmd_parse->add_option("-o,--output", parse.output, "Output file (stdout when omitted)");

  TrainOptions train;
  auto* cmd_train = app.add_subcommand("train-head", "Train the classifier head on a frozen backbone");
  cmd_train->add_option("--train", train.train, "Training split (JSONL)")->required()->check(CLI::ExistingFile);
  cmd_train->add_option("--val", train.val, "Validation split (JSONL)")->required()->check(CLI::ExistingFile);
  train.model.add(cmd_train);
  cmd_train->add_option("--lr", train.config.lr, "Adam learning rate")->capture_default_str();
  cmd_train->add_option("--batch", train.config.batch_size, "Batch size")->capture_default_str();
  cmd_train->add_option("--epochs", train.config.max_epochs, "Maximum epochs")->capture_default_str();
  cmd_train->add_option("--patience", train.config.patience, "Early-stopping patience")->capture_default_str();
  cmd_train->add_option("--hidden", train.config.hidden, "Hidden width")->capture_default_str();
  cmd_train->add_option("--dropout", train.config.dropout, "Dropout probability")->capture_default_str();
  cmd_train->add_option("--seed", train.config.seed, "Random seed")->capture_default_str();
  cmd_train->add_option("--out", train.out, "Head checkpoint to write")->required();
  cmd_train->add_option("--history", train.history, "Per-epoch history JSON to write");

  EvalTextOptions evt;
  auto* cmd_evt = app.add_subcommand("eval-text", "F1 report and confusion matrix for section labels");
  cmd_evt->add_option("--truth", evt.truth, "Labeled dataset (JSONL)")->required()->check(CLI::ExistingFile);
  cmd_evt->add_option("--pred", evt.pred, "Predictions (JSONL of record_id, label)");
  cmd_evt->add_option("--head", evt.head, "Head checkpoint (predict instead of --pred)");
  evt.model.add(cmd_evt);
  cmd_evt->add_option("-o,--output", evt.output, "Report file (stdout when omitted)");

  EvalDetectOptions evd;
  auto* cmd_evd = app.add_subcommand("eval-detect", "Per-class AP, mAP50 and mAP50-95");
  cmd_evd->add_option("--labels", evd.labels, "Directory of normalized label files")->required()->check(CLI::ExistingDirectory);
  cmd_evd->add_option("--pred", evd.pred, "Prediction file")->required()->check(CLI::ExistingFile);
  cmd_evd->add_option("--canvas", evd.canvas, "Label canvas size in pixels")->capture_default_str();
  cmd_evd->add_option("-o,--output", evd.output, "Report file (stdout when omitted)");

  AugmentOptions aug;
  auto* cmd_aug = app.add_subcommand("augment", "Multiply a text dataset with seeded augmentation");
  cmd_aug->add_option("--in", aug.input, "Input dataset (JSONL)")->required()->check(CLI::ExistingFile);
  cmd_aug->add_option("--out", aug.output, "Output dataset (stdout when omitted)");
  cmd_aug->add_option("--factor", aug.plan.factor, "Output size multiple")->capture_default_str();
  cmd_aug->add_option("--seed", aug.plan.seed, "Random seed")->capture_default_str();
  cmd_aug->add_option("--mix", aug.mix,
                      "Weights for char_delete,char_substitute,word_insert,contextual_substitute,back_translate")
      ->capture_default_str();
  cmd_aug->add_option("--char-rate", aug.plan.rates.char_rate, "Share of characters touched")->capture_default_str();
  cmd_aug->add_option("--insert-rate", aug.plan.rates.insert_rate, "Share of words inserted")->capture_default_str();
  cmd_aug->add_option("--substitute-rate", aug.plan.rates.substitute_rate, "Share of words substituted")
      ->capture_default_str();
  cmd_aug->add_option("--similarity", aug.similarity, "Similar-word table for contextual_substitute")
      ->check(CLI::ExistingFile);
  cmd_aug->add_option("--translator", aug.translator, "Back-translation port (identity)");
  cmd_aug->add_option("--jobs", aug.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cmd_aug->add_flag("--augment-raw", aug.raw, "Augment raw text instead of normalized text");
  cmd_aug->add_option("--headers", aug.headers, "Header lexicon file");
  cmd_aug->add_option("--stopwords", aug.stopwords, "Stopword file");

  SplitOptions split;
  auto* cmd_split = app.add_subcommand("split", "Person-disjoint train/val/test split");
  cmd_split->add_option("--in", split.input, "Input dataset (JSONL)")->required()->check(CLI::ExistingFile);
  cmd_split->add_option("--train", split.ratios.train, "Train ratio")->capture_default_str();
  cmd_split->add_option("--val", split.ratios.val, "Validation ratio")->capture_default_str();
  cmd_split->add_option("--test", split.ratios.test, "Test ratio")->capture_default_str();
  cmd_split->add_option("--by", split.by, "Grouping key (person)")->capture_default_str();
  cmd_split->add_option("--seed", split.seed, "Random seed")->capture_default_str();
  cmd_split->add_option("--out-dir", split.out_dir, "Write train/val/test JSONL here");
  cmd_split->add_option("-o,--output", split.output, "Assignment JSON (stdout when omitted)");

  ExportOptions exp;
  auto* cmd_exp = app.add_subcommand("export-report", "Render an eval-text or eval-detect report");
  cmd_exp->add_option("--in", exp.input, "Report JSON")->required()->check(CLI::ExistingFile);
  cmd_exp->add_option("--format", exp.format, "text or json")->capture_default_str()->check(CLI::IsMember({"text", "json"}));
  cmd_exp->add_option("-o,--output", exp.output, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cmd_parse) return run_parse(parse);
    if (*cmd_train) return run_train(train);
    if (*cmd_evt) return run_eval_text(evt);
    if (*cmd_evd) return run_eval_detect(evd);
    if (*cmd_aug) return run_augment(aug);
    if (*cmd_split) return run_split(split);
    if (*cmd_exp) return run_export(exp);
  } catch (const std::exception& e) {
    std::cerr << "resume-ie: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
