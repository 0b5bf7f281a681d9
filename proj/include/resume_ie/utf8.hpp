// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace resume_ie::utf8 {

/// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD, one per byte.
std::u32string decode(std::string_view text);

/// As decode(); `offsets` receives the byte offset of every code point plus a
/// final entry equal to text.size().
std::u32string decode(std::string_view text, std::vector<std::size_t>& offsets);

std::string encode(std::u32string_view code_points);
std::string encode(char32_t code_point);

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& words, std::string_view sep = " ");

}  // namespace resume_ie::utf8
