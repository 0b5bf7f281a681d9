// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Text dataset: section records, the five-class catalog, person-disjoint
// splitting and inverse-frequency class weights.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace resume_ie {

inline constexpr int kNumClasses = 5;

/// Class ids are fixed; the id order is the canonical catalog order.
enum class ClassLabel : int {
  education = 0,
  experience = 1,
  skill = 2,
  personal = 3,
  language = 4,
};

std::string_view class_name(ClassLabel label);
std::optional<ClassLabel> class_from_name(std::string_view name);
ClassLabel class_from_id(int id);
inline int class_id(ClassLabel label) { return static_cast<int>(label); }

/// The catalog in id order.
const std::array<ClassLabel, kNumClasses>& all_classes();

/// Reads a classes file (one name per line, line index = class id) and checks
/// that it agrees with the built-in catalog.
std::vector<ClassLabel> load_classes_file(const std::filesystem::path& path);

struct SectionRecord {
  std::string record_id;
  std::string person_id;
  ClassLabel label = ClassLabel::education;
  std::string text;
  std::optional<std::string> normalized_text;

  bool operator==(const SectionRecord&) const = default;
};

/// One JSON object per line with record_id, person_id, label, text and an
/// optional normalized_text. Blank lines are skipped.
std::vector<SectionRecord> load_text_dataset(const std::filesystem::path& path);
std::vector<SectionRecord> parse_text_dataset(std::string_view contents);
void save_text_dataset(const std::filesystem::path& path,
                       const std::vector<SectionRecord>& records);
std::string format_text_dataset(const std::vector<SectionRecord>& records);

using ClassCounts = std::array<std::size_t, kNumClasses>;

ClassCounts count_classes(const std::vector<SectionRecord>& records);

struct ClassWeights {
  std::array<double, kNumClasses> weights{1.0, 1.0, 1.0, 1.0, 1.0};

  double operator[](ClassLabel c) const { return weights[static_cast<std::size_t>(c)]; }
  double operator[](int c) const { return weights[static_cast<std::size_t>(c)]; }
};

/// w_c = N / (K * n_c). Throws PreconditionError if any class is absent.
ClassWeights compute_class_weights(const ClassCounts& counts);
ClassWeights compute_class_weights(const std::vector<SectionRecord>& records);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct SplitAssignment {
  std::vector<std::string> train;  // record ids, in input order
  std::vector<std::string> val;
  std::vector<std::string> test;
  SplitRatios ratios;
  std::array<std::size_t, 3> person_counts{};
};

/// Largest-remainder apportionment of `total` items over `ratios`.
/// Remainder ties go to the earlier bucket.
std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<double>& ratios);

/// Partitions persons (not records) at random; every record follows its person.
SplitAssignment split_by_person(const std::vector<SectionRecord>& records,
                                const SplitRatios& ratios, std::uint64_t seed);

}  // namespace resume_ie
