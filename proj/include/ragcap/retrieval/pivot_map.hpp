#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ragcap {

// (caption_id, lang) -> text. Captions sharing an id across languages are
// translations of one another, which is what makes English-pivot retrieval
// work. Lookups never fall back to another language.
class PivotMap {
 public:
  // Throws KeyCollision when (caption_id, lang) is already present.
  void add(std::string caption_id, std::string lang, std::string text);

  // Throws PivotMiss naming the id and language.
  const std::string& lookup(std::string_view caption_id, std::string_view lang) const;
  const std::string* find(std::string_view caption_id, std::string_view lang) const;

  std::size_t size() const noexcept { return texts_.size(); }

  // Every (caption_id, lang) pair lacking a text, over the ids seen in any language.
  std::vector<std::pair<std::string, std::string>> missing(std::span<const std::string> langs) const;

  // JSON-lines {"caption_id", "lang", "text"}.
  static PivotMap load(const std::filesystem::path& path);

 private:
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::string, std::less<>> texts_;
};

}  // namespace ragcap
