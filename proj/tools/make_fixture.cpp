// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Regenerates the bundled fixture set: a stripe-coded synthetic resume, stub
// model descriptors, a small labeled corpus with its WordPiece vocabulary, the
// trained head checkpoint and the small CLI fixtures.
//
//   make_fixture <out-dir>

#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "resume_ie/classify.hpp"
#include "resume_ie/corpus.hpp"
#include "resume_ie/pipeline.hpp"
#include "resume_ie/reference_ports.hpp"
#include "resume_ie/textprep.hpp"
#include "resume_ie/tokenizers.hpp"
#include "resume_ie/utf8.hpp"

namespace fs = std::filesystem;
using namespace resume_ie;

namespace {

constexpr std::uint64_t kFixtureSeed = 20240501;
constexpr int kBackboneDim = 64;
constexpr std::uint64_t kBackboneSeed = 1234;

struct SampleSection {
  ClassLabel label;
  std::string text;
};

const std::vector<SampleSection>& sample_resume() {
  static const std::vector<SampleSection> s = {
      {ClassLabel::education,
       "EDUCATION University of Example MASTERS OF SCIENCE MAY 2016 MAY 2020 Masters in Computer Science GPA: 3.35 "
       "Wrote a Thesis on: AI-Generated Diagnoses of Plant Disease for Mobile Platforms Won the Most Impactful Thesis "
       "Award Example College BACHELOR OF SCIENCE JUN 2009 JUN 2012 BS Computer Science GPA: 3.75 Minor in Literature "
       "Specialization for Enterprise Systems"},
      {ClassLabel::experience,
       "WORK EXPERIENCE Senior Software Engineer JAN 2019 PRESENT Analyze user needs and design software solutions "
       "Code high-performance programs using different frameworks Work with other teams for debugging Software "
       "Developer SEPT 2018 DEC 2019 Built back-end services that crunched data to deliver business insights Created "
       "automated release process tools Continuously improved system architecture"},
      {ClassLabel::skill, "SKILLS C++ Python C# Microsoft Word, Excel, PowerPoint Amazon Aws, Azure"},
      {ClassLabel::language, "LANGUAGE Turkish English"},
      {ClassLabel::personal,
       "PERSONAL PROFILE Office Address: 123 Anywhere St. Any City, State, Country 12345 Email: ...@com Portfolio: "
       "www....com LinkedIn: example"},
  };
  return s;
}

std::string charset_text() {
  std::string out = " \n";
  for (char c = 'a'; c <= 'z'; ++c) out += std::string(1, c) + "\n";
  for (char c = 'A'; c <= 'Z'; ++c) out += std::string(1, c) + "\n";
  for (char c = '0'; c <= '9'; ++c) out += std::string(1, c) + "\n";
  for (char c : std::string(".,:;+#@-/()&'!?\"%*_")) out += std::string(1, c) + "\n";
  return out;
}

// Word pools per class; generated sections mix class words with shared noise.
const std::vector<std::vector<std::string>>& class_pools() {
  static const std::vector<std::vector<std::string>> pools = {
      // education
      {"University", "College", "Bachelor", "Masters", "Master", "Science", "Degree", "GPA", "Thesis", "Minor",
       "Computer", "Literature", "Specialization", "Graduated", "High", "School", "Faculty", "Engineering", "PhD",
       "Diploma", "Coursework", "Honors", "Award", "Institute", "Major", "Academy", "Enterprise", "Systems",
       "Diagnoses", "Plant", "Disease", "Mobile", "Platforms", "Impactful", "BS", "MSc", "Dean's", "List",
       "Scholarship", "Student", "Campus", "Semester", "Courses", "Studies", "Wrote", "Won"},
      // experience
      {"Senior", "Software", "Engineer", "Developer", "Present", "Analyze", "user", "needs", "design", "solutions",
       "Code", "high-performance", "programs", "frameworks", "teams", "debugging", "Built", "back-end", "services",
       "crunched", "data", "deliver", "business", "insights", "Created", "automated", "release", "process",
       "tools", "Continuously", "improved", "system", "architecture", "Manager", "company", "Intern", "Led",
       "project", "responsible", "worked", "customers", "deployed", "maintained", "reduced", "costs", "clients",
       "Consultant", "Analyst", "Inc", "Ltd", "Work"},
      // skill
      {"C++", "Python", "C#", "Java", "Microsoft", "Word", "Excel", "PowerPoint", "Amazon", "Aws", "Azure", "SQL",
       "Docker", "Git", "Linux", "JavaScript", "React", "Kubernetes", "TensorFlow", "Photoshop", "Communication",
       "Leadership", "Teamwork", "Go", "Rust", "HTML", "CSS", "MATLAB", "Office", "Tableau", "PyTorch", "Jira",
       "Agile", "Scrum", "Node", "Spark", "Hadoop"},
      // personal
      {"Address:", "Email:", "Phone:", "Portfolio:", "LinkedIn:", "Office", "St.", "Street", "City,", "State,",
       "Country", "Birth", "Date:", "Nationality:", "@com", "www.", ".com", "GitHub:", "example", "Anywhere",
       "Any", "Driving", "License", "Marital", "Status:", "Avenue", "Road", "Apt", "Zip", "Mail", "Website:",
       "Contact", "Name:", "Surname:", "Mobile:", "Born"},
      // language
      {"Turkish", "English", "German", "French", "Spanish", "Arabic", "Italian", "Russian", "Native", "Fluent",
       "Intermediate", "Beginner", "Advanced", "Proficiency", "B2", "C1", "A2", "Mother", "Tongue", "Speaking",
       "Reading", "Writing", "Japanese", "Chinese", "Dutch", "Portuguese", "Elementary", "Bilingual", "TOEFL",
       "IELTS"},
  };
  return pools;
}

const std::vector<std::string>& shared_noise() {
  static const std::vector<std::string> noise = {"2015", "2016", "2017", "2018", "2019", "2020", "2021", "JAN",
                                                 "MAY", "JUN", "SEPT", "DEC", "12345", "123", "and", "of", "the",
                                                 "in", "with", "for"};
  return noise;
}

const std::vector<std::string>& class_headers() {
  static const std::vector<std::string> h = {"EDUCATION", "WORK EXPERIENCE", "SKILLS", "PERSONAL PROFILE", "LANGUAGE"};
  return h;
}

std::vector<SectionRecord> make_corpus(int persons, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SectionRecord> out;
  const auto& pools = class_pools();
  for (int p = 0; p < persons; ++p) {
    char pid[16];
    std::snprintf(pid, sizeof pid, "p%03d", p);
    for (int c = 0; c < kNumClasses; ++c) {
      const auto& pool = pools[static_cast<std::size_t>(c)];
      const int n_words = c == class_id(ClassLabel::language) ? 3 + static_cast<int>(rng() % 4)
                                                              : 6 + static_cast<int>(rng() % 14);
      std::vector<std::string> words;
      if (rng() % 2) words.push_back(class_headers()[static_cast<std::size_t>(c)]);
      for (int w = 0; w < n_words; ++w) {
        if (rng() % 5 == 0) {
          words.push_back(shared_noise()[rng() % shared_noise().size()]);
        } else {
          words.push_back(pool[rng() % pool.size()]);
        }
      }
      SectionRecord r;
      r.record_id = std::string(pid) + "-" + std::string(class_name(class_from_id(c)));
      r.person_id = pid;
      r.label = class_from_id(c);
      r.text = utf8::join(words);
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<std::string> make_vocab(const std::vector<SectionRecord>& corpus, const NormalizationRules& rules) {
  std::set<std::string> words;
  auto add_text = [&](const std::string& t) {
    for (const auto& w : utf8::split_whitespace(normalize(t, rules))) words.insert(w);
  };
  for (const auto& r : corpus) add_text(r.text);
  for (const auto& s : sample_resume()) add_text(s.text);
  std::vector<std::string> vocab = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  std::set<std::string> pieces;
  for (char c = 'a'; c <= 'z'; ++c) pieces.insert(std::string(1, c));
  for (char c = '0'; c <= '9'; ++c) pieces.insert(std::string(1, c));
  for (char c = 'a'; c <= 'z'; ++c) pieces.insert("##" + std::string(1, c));
  for (char c = '0'; c <= '9'; ++c) pieces.insert("##" + std::string(1, c));
  for (const auto& w : words) pieces.insert(w);
  vocab.insert(vocab.end(), pieces.begin(), pieces.end());
  return vocab;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Minimal single-page PDF with one BT/ET object per section, uncompressed.
std::string make_pdf(const std::vector<SampleSection>& sections) {
  std::string content;
  int y = 760;
  for (const auto& s : sections) {
    std::string escaped;
    for (char c : s.text) {
      if (c == '(' || c == ')' || c == '\\') escaped += '\\';
      escaped += c;
    }
    content += "BT /F1 9 Tf 40 " + std::to_string(y) + " Td (" + escaped + ") Tj ET\n";
    y -= 60;
  }
  std::vector<std::string> objs = {
      "<< /Type /Catalog /Pages 2 0 R >>",
      "<< /Type /Pages /Kids [3 0 R] /Count 1 >>",
      "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents 4 0 R /Resources << /Font << /F1 5 0 R >> >> >>",
      "<< /Length " + std::to_string(content.size()) + " >>\nstream\n" + content + "endstream",
      "<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>",
  };
  std::string pdf = "%PDF-1.4\n";
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    offsets.push_back(pdf.size());
    pdf += std::to_string(i + 1) + " 0 obj\n" + objs[i] + "\nendobj\n";
  }
  const std::size_t xref = pdf.size();
  pdf += "xref\n0 " + std::to_string(objs.size() + 1) + "\n0000000000 65535 f \n";
  for (std::size_t off : offsets) {
    char line[32];
    std::snprintf(line, sizeof line, "%010zu 00000 n \n", off);
    pdf += line;
  }
  pdf += "trailer\n<< /Size " + std::to_string(objs.size() + 1) + " /Root 1 0 R >>\nstartxref\n" +
         std::to_string(xref) + "\n%%EOF\n";
  return pdf;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture <out-dir>\n";
    return 2;
  }
  try {
    const fs::path dir = argv[1];
    fs::create_directories(dir);

    // charset, page, descriptors
    write_text(dir / "charset.txt", charset_text());
    const Charset charset = Charset::load(dir / "charset.txt");
    const auto& sample = sample_resume();
    const std::vector<StripeBlock> blocks = {
        {30, 40, 60, sample[0].text},   // education, left
        {340, 40, 60, sample[1].text},  // experience, right
        {30, 180, 80, sample[2].text},  // skill
        {400, 180, 60, sample[3].text}, // language
        {30, 240, 60, sample[4].text},  // personal
    };
    cv::imwrite((dir / "resume.png").string(), render_stripe_page(blocks, charset));
    cv::imwrite((dir / "blank.png").string(), cv::Mat(640, 640, CV_8UC3, cv::Scalar(255, 255, 255)));
    {
      std::ostringstream truth;
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Box b = stripe_block_extent(blocks[i]);
        truth << class_name(sample[i].label) << ' ' << b.x1 << ' ' << b.y1 << ' ' << b.x2 << ' ' << b.y2 << '\n';
      }
      write_text(dir / "resume_truth.txt", truth.str());
    }
    write_text(dir / "resume.pdf", make_pdf(sample));

    write_text(dir / "detector.model", "# stripe-code text group detector\nkind = stripe_detector\ndilate = 11\nscore = 0.9\n");
    write_text(dir / "recognizer.model", "# stripe-code recognizer\nkind = stripe_recognizer\ncharset = charset.txt\n");
    write_text(dir / "backbone.model",
               "# frozen hashed bag-of-tokens encoder\nkind = hashed_bag\ndim = " + std::to_string(kBackboneDim) +
                   "\nseed = " + std::to_string(kBackboneSeed) + "\n");
    write_text(dir / "skills_recognizer.model", "kind = fixed_recognizer\ncharset = charset.txt\ntext = skills\n");

    // word lists
    {
      std::string s;
      for (const auto& w : default_stopwords()) s += w + "\n";
      write_text(dir / "stopwords.txt", s);
      std::string h;
      for (const auto& w : default_header_lexicon()) h += w + "\n";
      write_text(dir / "headers.txt", h);
      std::string c;
      for (ClassLabel l : all_classes()) c += std::string(class_name(l)) + "\n";
      write_text(dir / "classes.txt", c);
    }

    // corpus, vocab, head
    const NormalizationRules rules = NormalizationRules::defaults();
    const auto corpus = make_corpus(40, kFixtureSeed);
    save_text_dataset(dir / "corpus.jsonl", corpus);
    {
      std::string v;
      for (const auto& t : make_vocab(corpus, rules)) v += t + "\n";
      write_text(dir / "vocab.txt", v);
    }
    const WordPieceTokenizer tok = WordPieceTokenizer::load(dir / "vocab.txt");
    HashedBagEmbedding port(kBackboneDim, kBackboneSeed);
    const SplitAssignment split = split_by_person(corpus, SplitRatios{}, kFixtureSeed);
    auto pick = [&](const std::vector<std::string>& ids) {
      std::set<std::string> want(ids.begin(), ids.end());
      std::vector<SectionRecord> out;
      for (const auto& r : corpus)
        if (want.count(r.record_id)) out.push_back(r);
      return out;
    };
    const auto train = pick(split.train), val = pick(split.val), test = pick(split.test);
    save_text_dataset(dir / "corpus_train.jsonl", train);
    save_text_dataset(dir / "corpus_val.jsonl", val);
    save_text_dataset(dir / "corpus_test.jsonl", test);

    TrainConfig cfg;
    cfg.hidden = 64;
    cfg.max_epochs = 1000;
    cfg.patience = 150;
    cfg.seed = kFixtureSeed;
    const TrainResult result = train_head(encode_records(train, tok, rules), label_ids(train),
                                          encode_records(val, tok, rules), label_ids(val), port, Pooling::cls, cfg);
    save_head(dir / "head.bin", result.head);
    std::cerr << "head: best epoch " << result.best_epoch << ", val F1-macro "
              << result.history[static_cast<std::size_t>(result.best_epoch - 1)].val_f1_macro << "\n";
    for (const auto& s : sample) {
      const Prediction p = predict(s.text, tok, port, Pooling::cls, result.head, rules);
      std::cerr << "  " << class_name(s.label) << " -> " << class_name(p.label) << " "
                << p.probabilities.maxCoeff() << "\n";
      if (p.label != s.label) std::cerr << "warning: sample section misclassified\n";
    }

    // CLI fixtures: 20-person split, 10-record augment, perfect predictions
    const auto people20 = make_corpus(20, kFixtureSeed + 1);
    save_text_dataset(dir / "people20.jsonl", people20);
    save_text_dataset(dir / "records10.jsonl", std::vector<SectionRecord>(people20.begin(), people20.begin() + 10));
    {
      std::string preds;
      for (const auto& r : test) {
        preds += "{\"record_id\":\"" + r.record_id + "\",\"label\":\"" + std::string(class_name(r.label)) + "\"}\n";
      }
      write_text(dir / "perfect_pred.jsonl", preds);
    }

    // detection fixture: ground truth from the rendered blocks, predictions = ground truth
    fs::create_directories(dir / "detect" / "labels");
    {
      std::ostringstream labels, preds;
      for (const auto& b : blocks) {
        const Box e = stripe_block_extent(b);
        labels << 0 << ' ' << e.center_x() / 640.0 << ' ' << e.center_y() / 640.0 << ' '
               << e.width() / 640.0 << ' ' << e.height() / 640.0 << '\n';
        preds << "resume 0 1.0 " << e.x1 << ' ' << e.y1 << ' ' << e.x2 << ' ' << e.y2 << '\n';
      }
      write_text(dir / "detect" / "labels" / "resume.txt", labels.str());
      write_text(dir / "detect" / "labels" / "blank.txt", "");
      write_text(dir / "detect" / "preds.txt", preds.str());
    }
    std::cerr << "fixtures written to " << dir.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "make_fixture: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
