#include "ragcap/concepts/unicode_text.hpp"

#include <memory>

#include <unicode/brkiter.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "ragcap/core/error.hpp"

namespace ragcap::unicode {

namespace {

icu::UnicodeString to_icu(std::string_view text) {
  require_utf8(text);
  return icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

std::string from_icu(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace

bool is_valid_utf8(std::string_view text) noexcept {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

void require_utf8(std::string_view text) {
  if (!is_valid_utf8(text)) throw Error(ErrorCode::kInvalidUtf8, "malformed UTF-8 sequence");
}

std::string to_nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kInvalidArgument, "ICU NFC unavailable");
  icu::UnicodeString out = nfc->normalize(to_icu(text), status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kInvalidArgument, "NFC normalization failed");
  return from_icu(out);
}

std::string fold_case(std::string_view text) {
  icu::UnicodeString s = to_icu(text);
  s.foldCase(U_FOLD_CASE_DEFAULT);
  return from_icu(s);
}

std::u32string decode(std::string_view text) {
  require_utf8(text);
  std::u32string out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back(static_cast<char32_t>(c));
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  if (error) throw Error(ErrorCode::kInvalidUtf8, "unencodable code point");
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append_utf8(out, cp);
  return out;
}

bool is_whitespace(char32_t cp) noexcept { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_punctuation(char32_t cp) noexcept { return u_ispunct(static_cast<UChar32>(cp)); }

bool is_cjk(char32_t cp) noexcept {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(static_cast<UChar32>(cp), &status);
  if (U_FAILURE(status)) return false;
  if (script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA) return true;
  // Prolonged sound mark and iteration marks are Common/Inherited but belong to words.
  return cp == U'ー' || cp == U'々' || cp == U'ゝ' || cp == U'ゞ' || cp == U'ヽ' ||
         cp == U'ヾ';
}

bool is_thai(char32_t cp) noexcept { return cp >= 0x0E00 && cp <= 0x0E7F; }

bool is_devanagari(char32_t cp) noexcept { return (cp >= 0x0900 && cp <= 0x097F) || (cp >= 0xA8E0 && cp <= 0xA8FF); }

std::vector<std::u32string> grapheme_clusters(std::u32string_view text) {
  std::vector<std::u32string> out;
  if (text.empty()) return out;
  icu::UnicodeString s = icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(text.data()),
                                                       static_cast<int32_t>(text.size()));
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator> it(icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) throw Error(ErrorCode::kInvalidArgument, "ICU character break iterator unavailable");
  it->setText(s);
  int32_t start = it->first();
  for (int32_t end = it->next(); end != icu::BreakIterator::DONE; start = end, end = it->next()) {
    icu::UnicodeString piece = s.tempSubStringBetween(start, end);
    std::u32string cluster(static_cast<std::size_t>(piece.countChar32()), U'\0');
    UErrorCode st = U_ZERO_ERROR;
    piece.toUTF32(reinterpret_cast<UChar32*>(cluster.data()), static_cast<int32_t>(cluster.size()), st);
    out.push_back(std::move(cluster));
  }
  return out;
}

std::u32string strip_punctuation(std::u32string_view token) {
  std::size_t begin = 0;
  std::size_t end = token.size();
  while (begin < end && is_punctuation(token[begin])) ++begin;
  while (end > begin && is_punctuation(token[end - 1])) --end;
  return std::u32string(token.substr(begin, end - begin));
}

std::size_t code_point_count(std::string_view text) { return decode(text).size(); }

}  // namespace ragcap::unicode
