#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "ragcap/core/language.hpp"

namespace ragcap {

enum class TokenizeMode { kWordlist, kEval };

// Splits NFC-normalized, case-folded text into raw pieces for a language
// without explicit word boundaries. Leading/trailing punctuation on each
// piece is stripped afterwards by the Tokenizer, so segmenters need not.
class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::string> segment(std::string_view text) const = 0;
};

// Built-in fallback for zh/ja: every Han/kana code point is its own token;
// runs of other non-space characters (Latin, digits) stay together.
class CodePointSegmenter final : public Segmenter {
 public:
  std::string name() const override { return "fallback-codepoint"; }
  std::vector<std::string> segment(std::string_view text) const override;
};

// Built-in fallback for th/hi: orthographic syllables approximated as
// extended grapheme clusters, with a Devanagari cluster ending in virama
// joined to the next cluster and Thai preposed vowels joined to the
// following consonant cluster.
class SyllableSegmenter final : public Segmenter {
 public:
  std::string name() const override { return "fallback-syllable"; }
  std::vector<std::string> segment(std::string_view text) const override;
};

class Tokenizer {
 public:
  // Registers the fallbacks for zh, ja, th and hi.
  Tokenizer();

  // Replaces the segmenter for `lang` (e.g. with a dictionary-based adapter).
  void set_segmenter(const std::string& lang, std::shared_ptr<const Segmenter> segmenter);

  // Wordlist-mode only: drop tokens shorter than this many code points. 0 = off.
  void set_min_token_length(std::size_t n) { min_token_length_ = n; }

  // "whitespace" for space-delimited languages, else the segmenter name.
  std::string adapter_name(std::string_view lang) const;

  std::vector<std::string> tokenize(const LanguageCode& lang, std::string_view text, TokenizeMode mode) const;

 private:
  std::map<std::string, std::shared_ptr<const Segmenter>, std::less<>> segmenters_;
  std::size_t min_token_length_ = 0;
};

const Tokenizer& default_tokenizer();

std::vector<std::string> tokenize(const LanguageCode& lang, std::string_view text, TokenizeMode mode);

}  // namespace ragcap
