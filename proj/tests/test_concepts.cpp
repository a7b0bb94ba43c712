#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ragcap/concepts/templates.hpp"
#include "ragcap/concepts/tokenizer.hpp"
#include "ragcap/concepts/unicode_text.hpp"
#include "ragcap/concepts/wordlist.hpp"
#include "ragcap/core/error.hpp"
#include "ragcap/core/jsonl.hpp"
#include "test_support.hpp"

using namespace ragcap;
using ragcap::testing::lang;
using ragcap::testing::TempDir;
using Tokens = std::vector<std::string>;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected ragcap::Error");
  return ErrorCode::kInvalidArgument;
}

std::vector<CaptionRecord> records(const std::string& code, const std::vector<std::string>& texts) {
  std::vector<CaptionRecord> out;
  for (std::size_t i = 0; i < texts.size(); ++i) out.push_back({"c" + std::to_string(i), "img" + std::to_string(i), lang(code), texts[i]});
  return out;
}

Wordlist wordlist(const std::string& code, const Tokens& tokens) {
  Wordlist w(lang(code));
  for (const auto& t : tokens) w.add(t, ConceptSource::kCoco);
  return w;
}

}  // namespace

TEST_CASE("space-delimited tokenization") {
  CHECK(tokenize(lang("en"), "A red bus.", TokenizeMode::kEval) == Tokens{"a", "red", "bus"});
  CHECK(tokenize(lang("en"), "", TokenizeMode::kEval).empty());
  CHECK(tokenize(lang("en"), "  ...  ", TokenizeMode::kEval).empty());
  CHECK(tokenize(lang("en"), "\"Hello,\" she said -- (twice)!", TokenizeMode::kEval) ==
        Tokens{"hello", "she", "said", "twice"});
  // Inner punctuation survives; only the ends are stripped.
  CHECK(tokenize(lang("en"), "a tuk-tuk's wheel", TokenizeMode::kEval) == Tokens{"a", "tuk-tuk's", "wheel"});
  CHECK(tokenize(lang("de"), "STRASSE Straße", TokenizeMode::kEval) == Tokens{"strasse", "strasse"});
  CHECK(tokenize(lang("el"), "ΣΚΎΛΟΣ", TokenizeMode::kEval) == Tokens{"σκύλοσ"});
  CHECK(tokenize(lang("ru"), "Красный автобус.", TokenizeMode::kEval) == Tokens{"красный", "автобус"});
  // Non-breaking and ideographic spaces separate tokens too.
  CHECK(tokenize(lang("fr"), "chat noir　blanc", TokenizeMode::kEval) == Tokens{"chat", "noir", "blanc"});
}

TEST_CASE("tokenization normalizes to NFC") {
  const std::string decomposed = "café";
  const std::string composed = "café";
  CHECK(tokenize(lang("fr"), decomposed, TokenizeMode::kEval) == Tokens{composed});
  CHECK(unicode::to_nfc(decomposed) == composed);
}

TEST_CASE("uncased scripts pass through case folding") {
  CHECK(tokenize(lang("ar"), "قطة سوداء", TokenizeMode::kEval) == Tokens{"قطة", "سوداء"});
  CHECK(tokenize(lang("he"), "חתול", TokenizeMode::kEval) == Tokens{"חתול"});
}

TEST_CASE("CJK fallback emits one token per code point") {
  CHECK(tokenize(lang("zh"), "红色巴士", TokenizeMode::kEval) == Tokens{"红", "色", "巴", "士"});
  CHECK(tokenize(lang("zh"), "红色巴士。", TokenizeMode::kEval) == Tokens{"红", "色", "巴", "士"});
  CHECK(tokenize(lang("ja"), "赤いバス", TokenizeMode::kEval) == Tokens{"赤", "い", "バ", "ス"});
  // Latin runs inside CJK text stay whole and are folded.
  CHECK(tokenize(lang("zh"), "一辆BUS车", TokenizeMode::kEval) == Tokens{"一", "辆", "bus", "车"});
  Tokenizer t;
  CHECK(t.adapter_name("zh") == "fallback-codepoint");
  CHECK(t.adapter_name("ja") == "fallback-codepoint");
  CHECK(t.adapter_name("en") == "whitespace");
}

TEST_CASE("syllable fallback for Thai and Hindi") {
  Tokenizer t;
  CHECK(t.adapter_name("th") == "fallback-syllable");
  CHECK(t.adapter_name("hi") == "fallback-syllable");
  // Virama joins a conjunct to its following cluster: "हिन्दी" -> हि + न्दी.
  CHECK(tokenize(lang("hi"), "हिन्दी", TokenizeMode::kEval) == Tokens{"हि", "न्दी"});
  CHECK(tokenize(lang("hi"), "लाल बस", TokenizeMode::kEval) == Tokens{"ला", "ल", "ब", "स"});
  // Thai preposed vowel เ attaches to the following consonant.
  CHECK(tokenize(lang("th"), "เด็ก", TokenizeMode::kEval) == Tokens{"เด็", "ก"});
  const auto tokens = tokenize(lang("th"), "รถบัสสีแดง", TokenizeMode::kEval);
  std::string joined;
  for (const auto& tok : tokens) joined += tok;
  CHECK(joined == "รถบัสสีแดง");
}

TEST_CASE("custom segmenters replace the fallback") {
  struct Whole final : Segmenter {
    std::string name() const override { return "whole"; }
    std::vector<std::string> segment(std::string_view text) const override { return {std::string(text)}; }
  };
  Tokenizer t;
  t.set_segmenter("zh", std::make_shared<Whole>());
  CHECK(t.adapter_name("zh") == "whole");
  CHECK(t.tokenize(lang("zh"), "红色巴士。", TokenizeMode::kEval) == Tokens{"红色巴士"});
}

TEST_CASE("min-length filter applies in wordlist mode only") {
  Tokenizer t;
  t.set_min_token_length(3);
  CHECK(t.tokenize(lang("en"), "a red bus on it", TokenizeMode::kWordlist) == Tokens{"red", "bus"});
  CHECK(t.tokenize(lang("en"), "a red bus on it", TokenizeMode::kEval).size() == 5);
}

TEST_CASE("invalid UTF-8 is rejected") {
  CHECK(code_of([] { tokenize(lang("en"), std::string("ab\xff"), TokenizeMode::kEval); }) == ErrorCode::kInvalidUtf8);
  CHECK(code_of([] { tokenize(lang("en"), std::string("\xc3"), TokenizeMode::kEval); }) == ErrorCode::kInvalidUtf8);
  CHECK_FALSE(unicode::is_valid_utf8("\xed\xa0\x80"));  // surrogate
  CHECK(unicode::is_valid_utf8("ok ✓"));
}

TEST_CASE("tokenization is deterministic in every language") {
  const std::string text = "Un Perro grande, 大きな犬, बड़ा कुत्ता, สุนัขตัวใหญ่.";
  for (const auto& [code, name] : LanguageTable::builtin().entries()) {
    const auto l = lang(code);
    CHECK(tokenize(l, text, TokenizeMode::kEval) == tokenize(l, text, TokenizeMode::kEval));
  }
}

TEST_CASE("extract_concepts is the set of unique tokens") {
  const auto w = extract_concepts(records("en", {"a red bus.", "a blue bus"}), lang("en"));
  CHECK(w.tokens() == Tokens{"a", "red", "bus", "blue"});
  CHECK(w.entries().front().source == ConceptSource::kCoco);

  const auto once = extract_concepts(records("en", {"the dog runs"}), lang("en"));
  const auto five = extract_concepts(records("en", Tokens(5, "the dog runs")), lang("en"));
  CHECK(once.tokens() == five.tokens());

  CHECK(code_of([] { extract_concepts({}, lang("en")); }) == ErrorCode::kEmptyCorpus);
  auto mixed = records("en", {"a cat"});
  mixed.push_back({"x", "y", lang("es"), "un gato"});
  CHECK(code_of([&] { extract_concepts(mixed, lang("en")); }) == ErrorCode::kLanguageMismatch);
}

TEST_CASE("extract_concepts is independent of caption order") {
  Tokens texts{"a cat on a mat", "two dogs play", "the cat sleeps", "a red bus", "dogs and cats"};
  const auto base = extract_concepts(records("en", texts), lang("en")).tokens();
  std::mt19937 rng(4);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(texts.begin(), texts.end(), rng);
    auto shuffled = extract_concepts(records("en", texts), lang("en")).tokens();
    auto a = base;
    std::sort(a.begin(), a.end());
    std::sort(shuffled.begin(), shuffled.end());
    CHECK(a == shuffled);
  }
}

TEST_CASE("wordlist dedups under NFC in first-seen order") {
  Wordlist w(lang("fr"));
  CHECK(w.add("café", ConceptSource::kCoco));
  CHECK_FALSE(w.add("café", ConceptSource::kWiki));
  CHECK(w.add("the", ConceptSource::kCoco));
  CHECK(w.tokens() == Tokens{"café", "the"});
  CHECK(w.contains("café"));
  CHECK(code_of([&] { w.add("", ConceptSource::kCoco); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { w.add("two\nlines", ConceptSource::kCoco); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("templates wrap concepts") {
  const auto table = TemplateTable::defaults();
  CHECK(table.wrap(lang("en"), "dog") == "a photo of a dog");
  CHECK(table.wrap(lang("es"), "perro") == "una foto de perro");
  CHECK(code_of([&] { table.wrap(lang("en"), ""); }) == ErrorCode::kInvalidArgument);
  // Missing language falls back to English unless disabled.
  CHECK(table.wrap(lang("de"), "hund") == "a photo of a hund");
  CHECK(code_of([&] { table.wrap(lang("de"), "hund", false); }) == ErrorCode::kMissingTemplate);

  TemplateTable cjk = table;
  cjk.set("zh", {"一张", "的照片", false});
  CHECK(cjk.wrap(lang("zh"), "狗") == "一张狗的照片");
  CHECK(apply_template({"", "", true}, "x") == "x");
  CHECK(apply_template({"  the ", " here ", true}, "x") == "the x here");
}

TEST_CASE("template table file overrides defaults") {
  TempDir tmp;
  ragcap::testing::write_text(tmp / "t.json", R"({"ja": {"prefix": "", "suffix": "の写真", "spaced": false},
                                                  "en": {"prefix": "an image of", "suffix": ""}})");
  const auto table = TemplateTable::load(tmp / "t.json");
  CHECK(table.wrap(lang("ja"), "犬") == "犬の写真");
  CHECK(table.wrap(lang("en"), "dog") == "an image of dog");
  CHECK(table.wrap(lang("es"), "perro") == "una foto de perro");
  ragcap::testing::write_text(tmp / "bad.json", R"({"ja": {"prefix": 3}})");
  CHECK(code_of([&] { TemplateTable::load(tmp / "bad.json"); }) == ErrorCode::kCorruptFile);
}

TEST_CASE("wrapping is injective and keeps the token whole") {
  const auto table = TemplateTable::defaults();
  const auto w = extract_concepts(records("en", {"a big brown dog chases the small cat", "two kids fly a kite"}), lang("en"));
  std::set<std::string> wrapped;
  for (const auto& token : w.tokens()) {
    const auto form = table.wrap(lang("en"), token);
    wrapped.insert(form);
    const auto parts = tokenize(lang("en"), form, TokenizeMode::kEval);
    CHECK(std::find(parts.begin(), parts.end(), token) != parts.end());
  }
  CHECK(wrapped.size() == w.size());

  auto copy = w;
  copy.apply_templates(table);
  for (const auto& e : copy.entries()) CHECK(e.wrapped.find(e.token) != std::string::npos);
}

TEST_CASE("merge_wordlists") {
  const auto ab = wordlist("en", {"a", "b"});
  const auto bc = wordlist("en", {"b", "c"});
  CHECK(merge_wordlists(ab, std::span(&bc, 1)).tokens() == Tokens{"a", "b", "c"});

  const Wordlist empty(lang("en"));
  CHECK(merge_wordlists(ab, std::span(&empty, 1)).tokens() == ab.tokens());

  const std::vector<Wordlist> twice{bc, bc};
  CHECK(merge_wordlists(ab, twice).tokens() == merge_wordlists(ab, std::span(&bc, 1)).tokens());

  const auto es = wordlist("es", {"x"});
  CHECK(code_of([&] { merge_wordlists(ab, std::span(&es, 1)); }) == ErrorCode::kLanguageMismatch);

  const ContaminationFilter filter(std::unordered_set<std::string>{"c"});
  const auto cd = wordlist("en", {"c", "d"});
  CHECK(merge_wordlists(ab, std::span(&cd, 1), &filter).tokens() == Tokens{"a", "b", "d"});
  // The filter never touches the base list.
  const auto ac = wordlist("en", {"a", "c"});
  CHECK(merge_wordlists(ac, std::span(&cd, 1), &filter).tokens() == Tokens{"a", "c", "d"});
}

TEST_CASE("merge size bounds hold on random lists") {
  std::mt19937 rng(12);
  std::uniform_int_distribution<int> word(0, 60);
  for (int trial = 0; trial < 30; ++trial) {
    auto make = [&](int n) {
      Wordlist w(lang("en"));
      for (int i = 0; i < n; ++i) w.add("w" + std::to_string(word(rng)), ConceptSource::kCoco);
      return w;
    };
    const auto base = make(20);
    const std::vector<Wordlist> adds{make(15), make(10)};
    const auto merged = merge_wordlists(base, adds);
    CHECK(merged.size() >= base.size());
    CHECK(merged.size() <= base.size() + adds[0].size() + adds[1].size());
    const auto base_tokens = base.tokens();
    const auto merged_tokens = merged.tokens();
    CHECK(std::equal(base_tokens.begin(), base_tokens.end(), merged_tokens.begin()));
  }
}

TEST_CASE("contamination filter from held-out images") {
  auto corpus = records("en", {"a dog on grass", "a tuk-tuk in traffic", "a dog in traffic"});
  const auto filter = ContaminationFilter::from_corpus(corpus, {"img1"});
  CHECK(filter.blocks("tuk-tuk"));
  CHECK_FALSE(filter.blocks("traffic"));
  CHECK_FALSE(filter.blocks("dog"));
  CHECK(filter.size() == 1);
}

TEST_CASE("wordlist files round trip with provenance") {
  TempDir tmp;
  auto w = wordlist("en", {"dog", "ünicode", "tuk-tuk"});
  w.provenance = {"coco_train.jsonl", "xm3600_filtered"};
  save_wordlist(tmp / "w.txt", w);
  CHECK(read_file(tmp / "w.txt") == "# source=coco_train.jsonl\n# source=xm3600_filtered\ndog\nünicode\ntuk-tuk\n");
  const auto loaded = load_wordlist(tmp / "w.txt", lang("en"));
  CHECK(loaded.tokens() == w.tokens());
  CHECK(loaded.provenance == w.provenance);

  ragcap::testing::write_text(tmp / "oracle.txt", "tuk-tuk\nrickshaw\ntuk-tuk\n\nstreet\n");
  const auto oracle = load_oracle_wordlist(tmp / "oracle.txt", lang("en"));
  CHECK(oracle.tokens() == Tokens{"tuk-tuk", "rickshaw", "street"});
  CHECK(oracle.entries().front().source == ConceptSource::kOracle);
  ragcap::testing::write_text(tmp / "empty.txt", "# nothing\n");
  CHECK(code_of([&] { load_oracle_wordlist(tmp / "empty.txt", lang("en")); }) == ErrorCode::kEmptyCorpus);
  CHECK(code_of([&] { load_wordlist(tmp / "missing.txt", lang("en")); }) == ErrorCode::kIoError);
}

TEST_CASE("oracle map file") {
  TempDir tmp;
  ragcap::testing::write_text(tmp / "o.jsonl", "{\"image_id\": \"img1\", \"concepts\": [\"tuk-tuk\"]}\n");
  const auto map = load_oracle_map(tmp / "o.jsonl");
  REQUIRE(map.contains("img1"));
  CHECK(map.at("img1") == Tokens{"tuk-tuk"});
  ragcap::testing::write_text(tmp / "dup.jsonl", "{\"image_id\": \"a\", \"concepts\": []}\n{\"image_id\": \"a\", \"concepts\": []}\n");
  CHECK(code_of([&] { load_oracle_map(tmp / "dup.jsonl"); }) == ErrorCode::kKeyCollision);
}
