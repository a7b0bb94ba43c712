#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace ragcap {

// A validated language tag plus the English name used in prompts.
struct LanguageCode {
  std::string code;
  std::string display_name;

  bool operator==(const LanguageCode&) const = default;
};

// True when `code` is 2-3 lowercase ASCII letters.
bool is_well_formed_language_code(std::string_view code) noexcept;

// code -> display name. Starts with the 36 XM3600 languages; user tables
// (JSON object {code: display_name}) may add or rename entries.
class LanguageTable {
 public:
  static const LanguageTable& builtin();

  LanguageTable();

  LanguageCode validate(std::string_view code) const;
  bool contains(std::string_view code) const;
  std::size_t size() const { return names_.size(); }
  const std::map<std::string, std::string, std::less<>>& entries() const { return names_; }

  void add(std::string_view code, std::string_view display_name);
  void extend_from_json(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string, std::less<>> names_;
};

// Validates against the built-in table.
LanguageCode validate_language(std::string_view code);

}  // namespace ragcap
