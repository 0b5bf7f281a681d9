// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#include "resume_ie/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "resume_ie/error.hpp"

namespace resume_ie {

namespace {

constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "education", "experience", "skill", "personal", "language"};

constexpr std::array<ClassLabel, kNumClasses> kCatalog = {
    ClassLabel::education, ClassLabel::experience, ClassLabel::skill,
    ClassLabel::personal, ClassLabel::language};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view class_name(ClassLabel label) {
  return kClassNames.at(static_cast<std::size_t>(label));
}

std::optional<ClassLabel> class_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == name) return kCatalog[i];
  }
  return std::nullopt;
}

ClassLabel class_from_id(int id) {
  if (id < 0 || id >= kNumClasses) {
    throw PreconditionError("class id out of range: " + std::to_string(id));
  }
  return kCatalog[static_cast<std::size_t>(id)];
}

const std::array<ClassLabel, kNumClasses>& all_classes() { return kCatalog; }

std::vector<ClassLabel> load_classes_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<ClassLabel> classes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string name = trim(line);
    if (name.empty()) continue;
    const auto label = class_from_name(name);
    if (!label) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": unknown label '" + name + "'");
    }
    if (class_id(*label) != static_cast<int>(classes.size())) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": class '" + name +
                        "' must have id " + std::to_string(class_id(*label)));
    }
    classes.push_back(*label);
  }
  if (classes.size() != kNumClasses) {
    throw FormatError(path.string() + ": expected " + std::to_string(kNumClasses) +
                      " classes, found " + std::to_string(classes.size()));
  }
  return classes;
}

std::vector<SectionRecord> parse_text_dataset(std::string_view contents) {
  std::vector<SectionRecord> records;
  std::set<std::string> seen;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    const std::string line = trim(contents.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto where = "line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where + ": malformed record: " + e.what());
    }
    if (!obj.is_object()) throw FormatError(where + ": record is not an object");

    auto field = [&](const char* key) -> std::string {
      const auto it = obj.find(key);
      if (it == obj.end() || !it->is_string()) {
        throw FormatError(where + ": missing string field '" + key + "'");
      }
      return it->get<std::string>();
    };

    SectionRecord rec;
    rec.record_id = field("record_id");
    rec.person_id = field("person_id");
    const std::string label = field("label");
    rec.text = field("text");
    if (const auto it = obj.find("normalized_text"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw FormatError(where + ": normalized_text must be a string");
      rec.normalized_text = it->get<std::string>();
    }

    const auto resolved = class_from_name(label);
    if (!resolved) throw FormatError(where + ": unknown label '" + label + "'");
    rec.label = *resolved;
    if (rec.record_id.empty()) throw FormatError(where + ": empty record_id");
    if (rec.person_id.empty()) throw FormatError(where + ": empty person_id");
    if (rec.text.empty()) throw FormatError(where + ": empty text");
    if (!seen.insert(rec.record_id).second) {
      throw FormatError(where + ": duplicate record_id '" + rec.record_id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SectionRecord> load_text_dataset(const std::filesystem::path& path) {
  try {
    return parse_text_dataset(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_text_dataset(const std::vector<SectionRecord>& records) {
  std::string out;
  for (const auto& rec : records) {
    nlohmann::ordered_json obj;
    obj["record_id"] = rec.record_id;
    obj["person_id"] = rec.person_id;
    obj["label"] = class_name(rec.label);
    obj["text"] = rec.text;
    if (rec.normalized_text) obj["normalized_text"] = *rec.normalized_text;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_text_dataset(const std::filesystem::path& path,
                       const std::vector<SectionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_text_dataset(records);
}

ClassCounts count_classes(const std::vector<SectionRecord>& records) {
  ClassCounts counts{};
  for (const auto& rec : records) ++counts[static_cast<std::size_t>(rec.label)];
  return counts;
}

ClassWeights compute_class_weights(const ClassCounts& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  ClassWeights w;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw PreconditionError("cannot weight absent class '" +
                              std::string(kClassNames[c]) + "'");
    }
    w.weights[c] = total / (static_cast<double>(kNumClasses) * static_cast<double>(counts[c]));
  }
  return w;
}

ClassWeights compute_class_weights(const std::vector<SectionRecord>& records) {
  return compute_class_weights(count_classes(records));
}

std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<double>& ratios) {
  std::vector<std::size_t> sizes(ratios.size());
  std::vector<double> frac(ratios.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double quota = ratios[i] * static_cast<double>(total);
    sizes[i] = static_cast<std::size_t>(std::floor(quota));
    frac[i] = quota - std::floor(quota);
    assigned += sizes[i];
  }
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) {
    ++sizes[order[k % order.size()]];
  }
  return sizes;
}

SplitAssignment split_by_person(const std::vector<SectionRecord>& records,
                                const SplitRatios& ratios, std::uint64_t seed) {
  const std::vector<double> r = {ratios.train, ratios.val, ratios.test};
  for (double x : r) {
    if (!(x > 0.0)) throw PreconditionError("split ratios must be positive");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw PreconditionError("split ratios must sum to 1");
  }

  std::vector<std::string> persons;
  {
    std::set<std::string> unique;
    for (const auto& rec : records) unique.insert(rec.person_id);
    persons.assign(unique.begin(), unique.end());  // ascending person_id
  }
  const auto sizes = largest_remainder(persons.size(), r);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) {
      throw PreconditionError("too few persons (" + std::to_string(persons.size()) +
                              ") for three non-empty splits");
    }
  }

  std::mt19937_64 rng(seed);
  std::shuffle(persons.begin(), persons.end(), rng);

  std::map<std::string, int> split_of;
  std::size_t k = 0;
  for (int s = 0; s < 3; ++s) {
    for (std::size_t n = 0; n < sizes[static_cast<std::size_t>(s)]; ++n) split_of[persons[k++]] = s;
  }

  SplitAssignment out;
  out.ratios = ratios;
  out.person_counts = {sizes[0], sizes[1], sizes[2]};
  for (const auto& rec : records) {
    switch (split_of.at(rec.person_id)) {
      case 0: out.train.push_back(rec.record_id); break;
      case 1: out.val.push_back(rec.record_id); break;
      default: out.test.push_back(rec.record_id); break;
    }
  }
  return out;
}

}  // namespace resume_ie
