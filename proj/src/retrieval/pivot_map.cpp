#include "ragcap/retrieval/pivot_map.hpp"

#include <set>

#include "ragcap/core/error.hpp"
#include "ragcap/core/jsonl.hpp"

namespace ragcap {

namespace {

struct KeyView {
  std::string_view id;
  std::string_view lang;
};

bool operator<(const std::pair<std::string, std::string>& a, const KeyView& b) {
  return std::tie(a.first, a.second) < std::tie(b.id, b.lang);
}
bool operator<(const KeyView& a, const std::pair<std::string, std::string>& b) {
  return std::tie(a.id, a.lang) < std::tie(b.first, b.second);
}

}  // namespace

void PivotMap::add(std::string caption_id, std::string lang, std::string text) {
  Key key{std::move(caption_id), std::move(lang)};
  if (texts_.contains(key)) {
    throw Error(ErrorCode::kKeyCollision, "caption '" + key.first + "' already has a '" + key.second + "' text");
  }
  texts_.emplace(std::move(key), std::move(text));
}

const std::string* PivotMap::find(std::string_view caption_id, std::string_view lang) const {
  auto it = texts_.find(KeyView{caption_id, lang});
  return it == texts_.end() ? nullptr : &it->second;
}

const std::string& PivotMap::lookup(std::string_view caption_id, std::string_view lang) const {
  if (const auto* text = find(caption_id, lang)) return *text;
  throw Error(ErrorCode::kPivotMiss,
              "caption '" + std::string(caption_id) + "' has no '" + std::string(lang) + "' text");
}

std::vector<std::pair<std::string, std::string>> PivotMap::missing(std::span<const std::string> langs) const {
  std::set<std::string> ids;
  for (const auto& [key, text] : texts_) ids.insert(key.first);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& id : ids) {
    for (const auto& lang : langs) {
      if (find(id, lang) == nullptr) out.emplace_back(id, lang);
    }
  }
  return out;
}

PivotMap PivotMap::load(const std::filesystem::path& path) {
  PivotMap map;
  for_each_jsonl(path, [&](const nlohmann::json& obj, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    map.add(require_string(obj, "caption_id", where), require_string(obj, "lang", where),
            require_string(obj, "text", where));
  });
  return map;
}

}  // namespace ragcap
