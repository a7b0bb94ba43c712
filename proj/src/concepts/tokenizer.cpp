#include "ragcap/concepts/tokenizer.hpp"

#include "ragcap/concepts/unicode_text.hpp"

namespace ragcap {

namespace {

constexpr char32_t kDevanagariVirama = 0x094D;

bool is_thai_preposed_vowel(char32_t cp) { return cp >= 0x0E40 && cp <= 0x0E44; }

void flush(std::u32string& run, std::vector<std::string>& out) {
  if (!run.empty()) out.push_back(unicode::encode(run));
  run.clear();
}

// Splits into whitespace-separated words, further breaking at punctuation
// code points that sit between script runs handled by `split_script`.
template <typename InScript, typename SplitScript>
std::vector<std::string> segment_words(std::string_view text, InScript in_script, SplitScript split_script) {
  std::vector<std::string> out;
  std::u32string other;
  std::u32string script_run;
  auto flush_script = [&] {
    if (script_run.empty()) return;
    for (auto& piece : split_script(script_run)) out.push_back(unicode::encode(piece));
    script_run.clear();
  };
  for (char32_t cp : unicode::decode(text)) {
    if (unicode::is_whitespace(cp)) {
      flush(other, out);
      flush_script();
    } else if (in_script(cp)) {
      flush(other, out);
      script_run.push_back(cp);
    } else if (unicode::is_punctuation(cp) && !script_run.empty()) {
      flush_script();
    } else {
      flush_script();
      other.push_back(cp);
    }
  }
  flush(other, out);
  flush_script();
  return out;
}

std::vector<std::u32string> syllables(const std::u32string& run) {
  std::vector<std::u32string> merged;
  bool join_next = false;
  for (auto& cluster : unicode::grapheme_clusters(run)) {
    if (join_next && !merged.empty()) {
      merged.back() += cluster;
    } else {
      merged.push_back(cluster);
    }
    const char32_t last = merged.back().back();
    join_next = last == kDevanagariVirama || (merged.back().size() == 1 && is_thai_preposed_vowel(last));
  }
  return merged;
}

}  // namespace

std::vector<std::string> CodePointSegmenter::segment(std::string_view text) const {
  return segment_words(text, unicode::is_cjk, [](const std::u32string& run) {
    std::vector<std::u32string> pieces;
    for (char32_t cp : run) pieces.emplace_back(1, cp);
    return pieces;
  });
}

std::vector<std::string> SyllableSegmenter::segment(std::string_view text) const {
  auto in_script = [](char32_t cp) {
    return (unicode::is_thai(cp) || unicode::is_devanagari(cp)) && !unicode::is_punctuation(cp);
  };
  return segment_words(text, in_script, syllables);
}

Tokenizer::Tokenizer() {
  auto cjk = std::make_shared<CodePointSegmenter>();
  auto syllable = std::make_shared<SyllableSegmenter>();
  segmenters_["zh"] = cjk;
  segmenters_["ja"] = cjk;
  segmenters_["th"] = syllable;
  segmenters_["hi"] = syllable;
}

void Tokenizer::set_segmenter(const std::string& lang, std::shared_ptr<const Segmenter> segmenter) {
  if (segmenter) {
    segmenters_[lang] = std::move(segmenter);
  } else {
    segmenters_.erase(lang);
  }
}

std::string Tokenizer::adapter_name(std::string_view lang) const {
  auto it = segmenters_.find(lang);
  return it == segmenters_.end() ? "whitespace" : it->second->name();
}

std::vector<std::string> Tokenizer::tokenize(const LanguageCode& lang, std::string_view text,
                                             TokenizeMode mode) const {
  const std::string normalized = unicode::fold_case(unicode::to_nfc(text));
  std::vector<std::string> pieces;
  if (auto it = segmenters_.find(lang.code); it != segmenters_.end()) {
    pieces = it->second->segment(normalized);
  } else {
    std::u32string word;
    for (char32_t cp : unicode::decode(normalized)) {
      if (unicode::is_whitespace(cp)) {
        flush(word, pieces);
      } else {
        word.push_back(cp);
      }
    }
    flush(word, pieces);
  }

  std::vector<std::string> tokens;
  tokens.reserve(pieces.size());
  for (const auto& piece : pieces) {
    std::u32string stripped = unicode::strip_punctuation(unicode::decode(piece));
    if (stripped.empty()) continue;
    if (mode == TokenizeMode::kWordlist && stripped.size() < min_token_length_) continue;
    tokens.push_back(unicode::encode(stripped));
  }
  return tokens;
}

const Tokenizer& default_tokenizer() {
  static const Tokenizer tokenizer;
  return tokenizer;
}

std::vector<std::string> tokenize(const LanguageCode& lang, std::string_view text, TokenizeMode mode) {
  return default_tokenizer().tokenize(lang, text, mode);
}

}  // namespace ragcap
