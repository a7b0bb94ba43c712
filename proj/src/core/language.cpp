#include "ragcap/core/language.hpp"

#include <fstream>

#include <json.hpp>

#include "ragcap/core/error.hpp"

namespace ragcap {

namespace {

constexpr std::pair<const char*, const char*> kXm3600Languages[] = {
    {"ar", "Arabic"},     {"bn", "Bengali"},    {"cs", "Czech"},      {"da", "Danish"},
    {"de", "German"},     {"el", "Greek"},      {"en", "English"},    {"es", "Spanish"},
    {"fa", "Farsi"},      {"fi", "Finnish"},    {"fil", "Filipino"},  {"fr", "French"},
    {"he", "Hebrew"},     {"hi", "Hindi"},      {"hr", "Croatian"},   {"hu", "Hungarian"},
    {"id", "Indonesian"}, {"it", "Italian"},    {"ja", "Japanese"},   {"ko", "Korean"},
    {"mi", "Maori"},      {"nl", "Dutch"},      {"no", "Norwegian"},  {"pl", "Polish"},
    {"pt", "Portuguese"}, {"quz", "Quechua"},   {"ro", "Romanian"},   {"ru", "Russian"},
    {"sv", "Swedish"},    {"sw", "Swahili"},    {"te", "Telugu"},     {"th", "Thai"},
    {"tr", "Turkish"},    {"uk", "Ukrainian"},  {"vi", "Vietnamese"}, {"zh", "Chinese"},
};

}  // namespace

bool is_well_formed_language_code(std::string_view code) noexcept {
  if (code.size() < 2 || code.size() > 3) return false;
  for (char c : code) {
    if (c < 'a' || c > 'z') return false;
  }
  return true;
}

const LanguageTable& LanguageTable::builtin() {
  static const LanguageTable table;
  return table;
}

LanguageTable::LanguageTable() {
  for (const auto& [code, name] : kXm3600Languages) names_.emplace(code, name);
}

LanguageCode LanguageTable::validate(std::string_view code) const {
  auto it = names_.find(code);
  if (it == names_.end()) {
    throw Error(ErrorCode::kUnknownLanguage, "'" + std::string(code) + "'");
  }
  return LanguageCode{it->first, it->second};
}

bool LanguageTable::contains(std::string_view code) const { return names_.contains(code); }

void LanguageTable::add(std::string_view code, std::string_view display_name) {
  if (!is_well_formed_language_code(code)) {
    throw Error(ErrorCode::kInvalidArgument, "malformed language code '" + std::string(code) + "'");
  }
  if (display_name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty display name for '" + std::string(code) + "'");
  }
  names_.insert_or_assign(std::string(code), std::string(display_name));
}

void LanguageTable::extend_from_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open language table " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": expected a JSON object");
  }
  for (const auto& [code, name] : doc.items()) {
    if (!name.is_string()) {
      throw Error(ErrorCode::kCorruptFile, path.string() + ": value for '" + code + "' is not a string");
    }
    add(code, name.get<std::string>());
  }
}

LanguageCode validate_language(std::string_view code) { return LanguageTable::builtin().validate(code); }

}  // namespace ragcap
