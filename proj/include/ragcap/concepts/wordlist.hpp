#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ragcap/concepts/templates.hpp"
#include "ragcap/concepts/tokenizer.hpp"
#include "ragcap/core/records.hpp"

namespace ragcap {

// Ordered set of concept entries for one language. Tokens are stored in NFC
// and deduplicated on that form; order is first-seen order.
class Wordlist {
 public:
  explicit Wordlist(LanguageCode lang);

  // Returns false when the (NFC) token is already present. Throws
  // InvalidArgument for empty tokens or tokens containing a newline.
  bool add(std::string_view token, ConceptSource source);

  bool contains(std::string_view token) const;
  const LanguageCode& lang() const noexcept { return lang_; }
  const std::vector<ConceptEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::vector<std::string> tokens() const;

  // Fills each entry's `wrapped` form.
  void apply_templates(const TemplateTable& table, bool allow_fallback = true);

  std::vector<std::string> provenance;

 private:
  LanguageCode lang_;
  std::vector<ConceptEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Every unique token of the corpus under wordlist-mode tokenization. No
// frequency or stopword filtering. Throws EmptyCorpus, LanguageMismatch.
Wordlist extract_concepts(std::span<const CaptionRecord> corpus, const LanguageCode& lang,
                          const Tokenizer& tokenizer = default_tokenizer(),
                          ConceptSource source = ConceptSource::kCoco);

// Tokens that occur only in held-out image-caption pairs and must not leak
// into an enriched lexicon.
class ContaminationFilter {
 public:
  ContaminationFilter() = default;
  explicit ContaminationFilter(std::unordered_set<std::string> blocked);

  // Blocks tokens that appear in captions of `excluded_images` and nowhere
  // else in `corpus`.
  static ContaminationFilter from_corpus(std::span<const CaptionRecord> corpus,
                                         const std::unordered_set<std::string>& excluded_images,
                                         const Tokenizer& tokenizer = default_tokenizer());

  bool blocks(std::string_view token) const;
  std::size_t size() const noexcept { return blocked_.size(); }

 private:
  std::unordered_set<std::string> blocked_;
};

// Base order first, then unseen addition tokens in addition order, skipping
// any the filter blocks. Throws LanguageMismatch.
Wordlist merge_wordlists(const Wordlist& base, std::span<const Wordlist> additions,
                         const ContaminationFilter* filter = nullptr);

// One token per line; lines starting with '#' are comments, "# source=X"
// comments populate provenance.
Wordlist load_wordlist(const std::filesystem::path& path, const LanguageCode& lang,
                       ConceptSource source = ConceptSource::kCoco);
void save_wordlist(const std::filesystem::path& path, const Wordlist& wordlist);

// load_wordlist with source=oracle; throws EmptyCorpus for a file with no tokens.
Wordlist load_oracle_wordlist(const std::filesystem::path& path, const LanguageCode& lang);

// image_id -> curated concepts, from JSON-lines {"image_id", "concepts"}.
using OracleMap = std::map<std::string, std::vector<std::string>, std::less<>>;
OracleMap load_oracle_map(const std::filesystem::path& path);

}  // namespace ragcap
