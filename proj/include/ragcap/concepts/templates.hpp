#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "ragcap/core/language.hpp"

namespace ragcap {

// Carrier phrase for one language; the concept token goes between prefix
// and suffix. Spaced templates join non-empty parts with a single space,
// unspaced ones (CJK) concatenate directly.
struct ConceptTemplate {
  std::string prefix;
  std::string suffix;
  bool spaced = true;

  bool operator==(const ConceptTemplate&) const = default;
};

class TemplateTable {
 public:
  // English and Spanish only; other languages need a user table.
  static TemplateTable defaults();
  // JSON {lang: {"prefix": str, "suffix": str, "spaced": bool}}. Entries
  // override the defaults.
  static TemplateTable load(const std::filesystem::path& path);

  void set(const std::string& lang, ConceptTemplate tmpl);
  const ConceptTemplate* find(std::string_view lang) const;
  const std::map<std::string, ConceptTemplate, std::less<>>& entries() const { return entries_; }

  // Without an entry for `lang`, falls back to English (logging a warning
  // once per language) unless `allow_fallback` is false, which raises
  // MissingTemplate. Empty tokens raise InvalidArgument.
  std::string wrap(const LanguageCode& lang, std::string_view token, bool allow_fallback = true) const;

 private:
  std::map<std::string, ConceptTemplate, std::less<>> entries_;
};

std::string apply_template(const ConceptTemplate& tmpl, std::string_view token);

}  // namespace ragcap
