// Copyright (C) 2026 The resume-ie Authors
// SPDX-License-Identifier: Apache-2.0

// Minimal PDF text-layer reader. Walks page objects in file order, inflates
// their content streams and collects the strings shown inside each BT/ET text
// object. Font encodings are not interpreted: single-byte strings are read as
// Latin-1, strings with a UTF-16BE BOM as UTF-16.

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "resume_ie/error.hpp"
#include "resume_ie/ingest.hpp"
#include "resume_ie/utf8.hpp"

namespace resume_ie {

namespace {

struct PdfObject {
  std::string_view dict;                  // text between "obj" and "stream"/"endobj"
  std::optional<std::string_view> stream;  // raw (still encoded) stream bytes
};

bool is_pdf_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\0';
}

bool is_delim(char c) {
  return c == '(' || c == ')' || c == '<' || c == '>' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '/' || c == '%';
}

bool is_regular(char c) { return !is_pdf_space(c) && !is_delim(c); }

// Parses "N G obj" headers and their bodies.
std::map<int, PdfObject> scan_objects(std::string_view pdf, std::vector<int>& file_order) {
  std::map<int, PdfObject> objects;
  std::size_t pos = 0;
  while ((pos = pdf.find("obj", pos)) != std::string_view::npos) {
    const std::size_t kw = pos;
    pos += 3;
    if (pos < pdf.size() && is_regular(pdf[pos])) continue;  // "objfoo"
    // walk back over "N G "
    std::size_t p = kw;
    auto skip_back_space = [&] {
      while (p > 0 && is_pdf_space(pdf[p - 1])) --p;
    };
    auto read_back_int = [&]() -> std::optional<int> {
      const std::size_t end = p;
      while (p > 0 && std::isdigit(static_cast<unsigned char>(pdf[p - 1]))) --p;
      if (p == end) return std::nullopt;
      return std::stoi(std::string(pdf.substr(p, end - p)));
    };
    if (p == 0 || !is_pdf_space(pdf[p - 1])) continue;
    skip_back_space();
    if (!read_back_int()) continue;
    skip_back_space();
    const auto number = read_back_int();
    if (!number) continue;

    const std::size_t end = pdf.find("endobj", pos);
    if (end == std::string_view::npos) break;
    std::string_view body = pdf.substr(pos, end - pos);
    PdfObject obj;
    obj.dict = body;
    const std::size_t s = body.find("stream");
    if (s != std::string_view::npos && body.substr(0, s).find("endstream") == std::string_view::npos) {
      std::size_t data = s + 6;
      if (data < body.size() && body[data] == '\r') ++data;
      if (data < body.size() && body[data] == '\n') ++data;
      std::size_t stop = body.rfind("endstream");
      if (stop == std::string_view::npos || stop < data) stop = body.size();
      while (stop > data && (body[stop - 1] == '\n' || body[stop - 1] == '\r')) --stop;
      obj.dict = body.substr(0, s);
      obj.stream = body.substr(data, stop - data);
    }
    if (!objects.count(*number)) file_order.push_back(*number);
    objects[*number] = obj;
    pos = end + 6;
  }
  return objects;
}

// True when `dict` has "/Type /<name>" exactly (not a longer name).
bool has_type(std::string_view dict, std::string_view name) {
  std::size_t pos = 0;
  while ((pos = dict.find("/Type", pos)) != std::string_view::npos) {
    pos += 5;
    std::size_t p = pos;
    while (p < dict.size() && is_pdf_space(dict[p])) ++p;
    if (p < dict.size() && dict[p] == '/') {
      std::size_t e = p + 1;
      while (e < dict.size() && is_regular(dict[e])) ++e;
      if (dict.substr(p + 1, e - p - 1) == name) return true;
    }
  }
  return false;
}

// Object numbers referenced by "/Contents N G R" or "/Contents [ ... ]".
std::vector<int> content_refs(std::string_view dict) {
  std::vector<int> refs;
  std::size_t pos = dict.find("/Contents");
  if (pos == std::string_view::npos) return refs;
  pos += 9;
  while (pos < dict.size() && is_pdf_space(dict[pos])) ++pos;
  std::size_t end = pos;
  if (pos < dict.size() && dict[pos] == '[') {
    end = dict.find(']', pos);
    if (end == std::string_view::npos) return refs;
    ++pos;
  } else {
    // single reference: three tokens
    int tokens = 0;
    while (end < dict.size() && tokens < 3) {
      while (end < dict.size() && is_pdf_space(dict[end])) ++end;
      while (end < dict.size() && is_regular(dict[end])) ++end;
      ++tokens;
    }
  }
  std::vector<std::string> toks;
  std::string cur;
  for (std::size_t i = pos; i < end; ++i) {
    if (is_regular(dict[i])) {
      cur.push_back(dict[i]);
    } else if (!cur.empty()) {
      toks.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) toks.push_back(cur);
  for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
    if (toks[i + 2] == "R" &&
        std::isdigit(static_cast<unsigned char>(toks[i][0]))) {
      refs.push_back(std::stoi(toks[i]));
      i += 2;
    }
  }
  return refs;
}

std::optional<std::string> inflate(std::string_view data) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) return std::nullopt;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  std::string out;
  char buf[16384];
  int ret = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    ret = ::inflate(&zs, Z_NO_FLUSH);
    if (ret != Z_OK && ret != Z_STREAM_END) {
      inflateEnd(&zs);
      return std::nullopt;
    }
    out.append(buf, sizeof(buf) - zs.avail_out);
  } while (ret != Z_STREAM_END && zs.avail_in > 0);
  inflateEnd(&zs);
  return out;
}

std::optional<std::string> decode_stream(const PdfObject& obj) {
  if (!obj.stream) return std::nullopt;
  const std::string_view dict = obj.dict;
  if (dict.find("/Filter") == std::string_view::npos) return std::string(*obj.stream);
  if (dict.find("/FlateDecode") != std::string_view::npos &&
      dict.find("/DecodeParms") == std::string_view::npos) {
    // only plain Flate is understood; anything chained is skipped
    const auto filter = dict.substr(dict.find("/Filter"));
    if (filter.find("/ASCII") != std::string_view::npos ||
        filter.find("/LZW") != std::string_view::npos) {
      return std::nullopt;
    }
    return inflate(*obj.stream);
  }
  return std::nullopt;
}

std::string pdf_string_to_utf8(const std::string& raw) {
  if (raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0xFE &&
      static_cast<unsigned char>(raw[1]) == 0xFF) {
    std::u32string cps;
    for (std::size_t i = 2; i + 1 < raw.size(); i += 2) {
      char32_t u = (static_cast<unsigned char>(raw[i]) << 8) | static_cast<unsigned char>(raw[i + 1]);
      if (u >= 0xD800 && u <= 0xDBFF && i + 3 < raw.size()) {
        char32_t lo = (static_cast<unsigned char>(raw[i + 2]) << 8) |
                      static_cast<unsigned char>(raw[i + 3]);
        u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
        i += 2;
      }
      cps.push_back(u);
    }
    return utf8::encode(cps);
  }
  std::string out;
  for (unsigned char c : raw) out += utf8::encode(static_cast<char32_t>(c));
  return out;
}

// Content-stream lexer, just enough for text operators.
class ContentLexer {
 public:
  enum class Kind { string, number, op, array_open, array_close, other, end };
  struct Token {
    Kind kind;
    std::string text;
  };

  explicit ContentLexer(std::string_view s) : s_(s) {}

  Token next() {
    skip_space_and_comments();
    if (i_ >= s_.size()) return {Kind::end, {}};
    const char c = s_[i_];
    if (c == '(') return {Kind::string, literal_string()};
    if (c == '<') {
      if (i_ + 1 < s_.size() && s_[i_ + 1] == '<') {
        i_ += 2;
        return {Kind::other, "<<"};
      }
      return {Kind::string, hex_string()};
    }
    if (c == '>') {
      i_ += (i_ + 1 < s_.size() && s_[i_ + 1] == '>') ? 2 : 1;
      return {Kind::other, ">>"};
    }
    if (c == '[') {
      ++i_;
      return {Kind::array_open, "["};
    }
    if (c == ']') {
      ++i_;
      return {Kind::array_close, "]"};
    }
    if (c == '/') {
      std::size_t j = i_ + 1;
      while (j < s_.size() && is_regular(s_[j])) ++j;
      Token t{Kind::other, std::string(s_.substr(i_, j - i_))};
      i_ = j;
      return t;
    }
    if (c == '{' || c == '}' || c == ')') {
      ++i_;
      return {Kind::other, std::string(1, c)};
    }
    std::size_t j = i_;
    while (j < s_.size() && is_regular(s_[j])) ++j;
    std::string word(s_.substr(i_, j - i_));
    i_ = j;
    const bool numeric = !word.empty() && word.find_first_not_of("+-.0123456789") == std::string::npos;
    return {numeric ? Kind::number : Kind::op, word};
  }

 private:
  void skip_space_and_comments() {
    while (i_ < s_.size()) {
      if (is_pdf_space(s_[i_])) {
        ++i_;
      } else if (s_[i_] == '%') {
        while (i_ < s_.size() && s_[i_] != '\n' && s_[i_] != '\r') ++i_;
      } else {
        break;
      }
    }
  }

  std::string literal_string() {
    std::string out;
    int depth = 0;
    ++i_;  // '('
    while (i_ < s_.size()) {
      char c = s_[i_++];
      if (c == '\\' && i_ < s_.size()) {
        char e = s_[i_++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 't': out.push_back('\t'); break;
          case 'b': out.push_back('\b'); break;
          case 'f': out.push_back('\f'); break;
          case '\r':
            if (i_ < s_.size() && s_[i_] == '\n') ++i_;
            break;
          case '\n': break;
          default:
            if (e >= '0' && e <= '7') {
              int v = e - '0';
              for (int k = 0; k < 2 && i_ < s_.size() && s_[i_] >= '0' && s_[i_] <= '7'; ++k) {
                v = v * 8 + (s_[i_++] - '0');
              }
              out.push_back(static_cast<char>(v & 0xFF));
            } else {
              out.push_back(e);
            }
        }
      } else if (c == '(') {
        ++depth;
        out.push_back(c);
      } else if (c == ')') {
        if (depth == 0) break;
        --depth;
        out.push_back(c);
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  std::string hex_string() {
    ++i_;  // '<'
    std::string digits;
    while (i_ < s_.size() && s_[i_] != '>') {
      if (std::isxdigit(static_cast<unsigned char>(s_[i_]))) digits.push_back(s_[i_]);
      ++i_;
    }
    if (i_ < s_.size()) ++i_;
    if (digits.size() % 2) digits.push_back('0');
    std::string out;
    for (std::size_t k = 0; k < digits.size(); k += 2) {
      out.push_back(static_cast<char>(std::stoi(digits.substr(k, 2), nullptr, 16)));
    }
    return out;
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

std::string collapse_spaces(const std::string& s) {
  return utf8::join(utf8::split_whitespace(s));
}

// Kerning adjustments in TJ arrays beyond this (thousandths of an em) read as a word gap.
constexpr double kWordGapKerning = -200.0;

void mine_content(std::string_view content, int page, std::vector<RawTextBlock>& out) {
  ContentLexer lex(content);
  bool in_text = false;
  std::string block;
  std::vector<ContentLexer::Token> operands;
  for (auto tok = lex.next(); tok.kind != ContentLexer::Kind::end; tok = lex.next()) {
    if (tok.kind != ContentLexer::Kind::op) {
      operands.push_back(std::move(tok));
      continue;
    }
    const std::string& op = tok.text;
    if (op == "BT") {
      in_text = true;
      block.clear();
    } else if (op == "ET") {
      if (in_text) {
        std::string text = collapse_spaces(block);
        if (!text.empty()) out.push_back({std::move(text), page, std::nullopt});
      }
      in_text = false;
    } else if (in_text) {
      if (op == "Tj" || op == "'" || op == "\"") {
        if (op != "Tj") block.push_back(' ');
        for (auto it = operands.rbegin(); it != operands.rend(); ++it) {
          if (it->kind == ContentLexer::Kind::string) {
            block += pdf_string_to_utf8(it->text);
            break;
          }
        }
      } else if (op == "TJ") {
        for (const auto& o : operands) {
          if (o.kind == ContentLexer::Kind::string) {
            block += pdf_string_to_utf8(o.text);
          } else if (o.kind == ContentLexer::Kind::number && std::stod(o.text) < kWordGapKerning) {
            block.push_back(' ');
          }
        }
      } else if (op == "T*" || op == "Td" || op == "TD") {
        block.push_back(' ');
      }
    }
    operands.clear();
  }
}

}  // namespace

std::vector<RawTextBlock> mine_pdf_text(std::string_view pdf) {
  if (pdf.substr(0, 4) != "%PDF") throw FormatError("not a PDF file");
  std::vector<int> order;
  const auto objects = scan_objects(pdf, order);
  if (objects.empty()) throw FormatError("PDF has no readable objects");

  std::vector<RawTextBlock> blocks;
  int page = 0;
  bool any_page = false;
  for (int num : order) {
    const auto& obj = objects.at(num);
    if (!has_type(obj.dict, "Page")) continue;
    any_page = true;
    for (int ref : content_refs(obj.dict)) {
      const auto it = objects.find(ref);
      if (it == objects.end()) continue;
      if (const auto content = decode_stream(it->second)) mine_content(*content, page, blocks);
    }
    ++page;
  }
  if (!any_page) {
    // no page tree we understand; fall back to every content stream in file order
    for (int num : order) {
      const auto& obj = objects.at(num);
      if (!obj.stream) continue;
      if (obj.dict.find("/Image") != std::string_view::npos) continue;
      if (const auto content = decode_stream(obj)) mine_content(*content, 0, blocks);
    }
  }
  return blocks;
}

}  // namespace resume_ie
