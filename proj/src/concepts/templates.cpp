#include "ragcap/concepts/templates.hpp"

#include <fstream>
#include <iostream>
#include <mutex>
#include <set>

#include <json.hpp>

#include "ragcap/core/error.hpp"
#include "ragcap/core/records.hpp"

namespace ragcap {

TemplateTable TemplateTable::defaults() {
  TemplateTable table;
  table.set("en", {"a photo of a", "", true});
  table.set("es", {"una foto de", "", true});
  return table;
}

TemplateTable TemplateTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open template table " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kCorruptFile, path.string() + ": expected a JSON object");
  TemplateTable table = defaults();
  for (const auto& [lang, entry] : doc.items()) {
    try {
      ConceptTemplate tmpl;
      entry.at("prefix").get_to(tmpl.prefix);
      tmpl.suffix = entry.value("suffix", std::string());
      tmpl.spaced = entry.value("spaced", true);
      table.set(lang, std::move(tmpl));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kCorruptFile, path.string() + ": entry '" + lang + "': " + e.what());
    }
  }
  return table;
}

void TemplateTable::set(const std::string& lang, ConceptTemplate tmpl) { entries_.insert_or_assign(lang, std::move(tmpl)); }

const ConceptTemplate* TemplateTable::find(std::string_view lang) const {
  auto it = entries_.find(lang);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string apply_template(const ConceptTemplate& tmpl, std::string_view token) {
  if (!tmpl.spaced) return tmpl.prefix + std::string(token) + tmpl.suffix;
  std::string out;
  for (const std::string& part : {trim(tmpl.prefix), std::string(token), trim(tmpl.suffix)}) {
    if (part.empty()) continue;
    if (!out.empty()) out += ' ';
    out += part;
  }
  return out;
}

std::string TemplateTable::wrap(const LanguageCode& lang, std::string_view token, bool allow_fallback) const {
  if (token.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot wrap an empty concept token");
  if (const auto* tmpl = find(lang.code)) return apply_template(*tmpl, token);
  const auto* english = find("en");
  if (!allow_fallback || english == nullptr) {
    throw Error(ErrorCode::kMissingTemplate, "no template for '" + lang.code + "'");
  }
  static std::mutex mu;
  static std::set<std::string> warned;
  {
    std::lock_guard lock(mu);
    if (warned.insert(lang.code).second) {
      std::cerr << "warning: no concept template for '" << lang.code << "', using the English template\n";
    }
  }
  return apply_template(*english, token);
}

}  // namespace ragcap
