// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace resume_ie {

// FNV-1a, used to fold string keys into RNG seeds.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for one (seed, key, index) triple; independent of iteration order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view key,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a(key)) + index);
}

}  // namespace resume_ie
