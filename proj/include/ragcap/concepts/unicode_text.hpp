#pragma once

#include <string>
#include <string_view>
#include <vector>

// Thin ICU wrappers. Every function taking UTF-8 throws InvalidUtf8 on
// malformed input.
namespace ragcap::unicode {

bool is_valid_utf8(std::string_view text) noexcept;
void require_utf8(std::string_view text);

std::string to_nfc(std::string_view text);
// Unicode default case folding; uncased scripts pass through untouched.
std::string fold_case(std::string_view text);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);

bool is_whitespace(char32_t cp) noexcept;
bool is_punctuation(char32_t cp) noexcept;
// Han ideographs, kana, and CJK iteration marks.
bool is_cjk(char32_t cp) noexcept;
bool is_thai(char32_t cp) noexcept;
bool is_devanagari(char32_t cp) noexcept;

// Extended grapheme clusters.
std::vector<std::u32string> grapheme_clusters(std::u32string_view text);

// Removes leading and trailing punctuation code points.
std::u32string strip_punctuation(std::u32string_view token);

std::size_t code_point_count(std::string_view text);

}  // namespace ragcap::unicode
