#pragma once

#include <cstddef>
#include <string_view>

namespace cadsev::text::detail {

inline bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline bool is_word_char(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c == '-';
}

/// Byte length of the UTF-8 sequence introduced by `lead` (1 for invalid bytes).
inline std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

/// Width of whitespace at `pos` (ASCII blanks and U+3000), or 0.
inline std::size_t whitespace_at(std::string_view text, std::size_t pos) {
  if (is_ascii_space(text[pos])) return 1;
  if (text.substr(pos, 3) == "\xE3\x80\x80") return 3;
  return 0;
}

/// A match [pos, pos+len) must not cut through a run of ASCII word characters.
inline bool on_word_boundaries(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos > 0 && is_word_char(text[pos - 1]) && is_word_char(text[pos])) return false;
  const std::size_t end = pos + len;
  if (end < text.size() && is_word_char(text[end - 1]) && is_word_char(text[end])) return false;
  return true;
}

}  // namespace cadsev::text::detail
