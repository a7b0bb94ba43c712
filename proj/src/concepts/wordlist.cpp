#include "ragcap/concepts/wordlist.hpp"

#include <fstream>

#include "ragcap/concepts/unicode_text.hpp"
#include "ragcap/core/error.hpp"
#include "ragcap/core/jsonl.hpp"

namespace ragcap {

Wordlist::Wordlist(LanguageCode lang) : lang_(std::move(lang)) {}

bool Wordlist::add(std::string_view token, ConceptSource source) {
  if (token.empty()) throw Error(ErrorCode::kInvalidArgument, "empty concept token");
  if (token.find('\n') != std::string_view::npos || token.find('\r') != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "concept token contains a newline");
  }
  std::string key = unicode::to_nfc(token);
  if (index_.contains(key)) return false;
  index_.emplace(key, entries_.size());
  entries_.push_back(ConceptEntry{std::move(key), lang_, source, {}});
  return true;
}

bool Wordlist::contains(std::string_view token) const { return index_.contains(unicode::to_nfc(token)); }

std::vector<std::string> Wordlist::tokens() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.token);
  return out;
}

void Wordlist::apply_templates(const TemplateTable& table, bool allow_fallback) {
  for (auto& e : entries_) e.wrapped = table.wrap(lang_, e.token, allow_fallback);
}

Wordlist extract_concepts(std::span<const CaptionRecord> corpus, const LanguageCode& lang,
                          const Tokenizer& tokenizer, ConceptSource source) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "no captions for '" + lang.code + "'");
  Wordlist out(lang);
  for (const auto& record : corpus) {
    if (record.lang.code != lang.code) {
      throw Error(ErrorCode::kLanguageMismatch,
                  "caption '" + record.caption_id + "' is '" + record.lang.code + "', expected '" + lang.code + "'");
    }
    for (const auto& token : tokenizer.tokenize(lang, record.text, TokenizeMode::kWordlist)) out.add(token, source);
  }
  return out;
}

ContaminationFilter::ContaminationFilter(std::unordered_set<std::string> blocked) {
  for (const auto& token : blocked) blocked_.insert(unicode::to_nfc(token));
}

ContaminationFilter ContaminationFilter::from_corpus(std::span<const CaptionRecord> corpus,
                                                     const std::unordered_set<std::string>& excluded_images,
                                                     const Tokenizer& tokenizer) {
  std::unordered_set<std::string> held_out;
  std::unordered_set<std::string> kept;
  for (const auto& record : corpus) {
    auto& target = excluded_images.contains(record.image_id) ? held_out : kept;
    for (auto& token : tokenizer.tokenize(record.lang, record.text, TokenizeMode::kWordlist)) {
      target.insert(std::move(token));
    }
  }
  std::unordered_set<std::string> blocked;
  for (const auto& token : held_out) {
    if (!kept.contains(token)) blocked.insert(token);
  }
  return ContaminationFilter(std::move(blocked));
}

bool ContaminationFilter::blocks(std::string_view token) const { return blocked_.contains(unicode::to_nfc(token)); }

Wordlist merge_wordlists(const Wordlist& base, std::span<const Wordlist> additions, const ContaminationFilter* filter) {
  Wordlist out = base;
  for (const auto& addition : additions) {
    if (addition.lang().code != base.lang().code) {
      throw Error(ErrorCode::kLanguageMismatch,
                  "cannot merge '" + addition.lang().code + "' into '" + base.lang().code + "'");
    }
    for (const auto& entry : addition.entries()) {
      if (filter != nullptr && filter->blocks(entry.token)) continue;
      out.add(entry.token, entry.source);
    }
    out.provenance.insert(out.provenance.end(), addition.provenance.begin(), addition.provenance.end());
  }
  return out;
}

Wordlist load_wordlist(const std::filesystem::path& path, const LanguageCode& lang, ConceptSource source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open wordlist " + path.string());
  Wordlist out(lang);
  std::string line;
  std::size_t line_no = 0;
  bool saw_provenance = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!unicode::is_valid_utf8(line)) {
      throw Error(ErrorCode::kInvalidUtf8, path.string() + ":" + std::to_string(line_no));
    }
    if (!line.empty() && line.front() == '#') {
      constexpr std::string_view kSource = "# source=";
      if (line.starts_with(kSource)) {
        out.provenance.push_back(line.substr(kSource.size()));
        saw_provenance = true;
      }
      continue;
    }
    std::string token = trim(line);
    if (!token.empty()) out.add(token, source);
  }
  if (!saw_provenance) out.provenance.push_back(path.string());
  return out;
}

void save_wordlist(const std::filesystem::path& path, const Wordlist& wordlist) {
  std::string content;
  for (const auto& source : wordlist.provenance) content += "# source=" + source + "\n";
  for (const auto& entry : wordlist.entries()) content += entry.token + "\n";
  write_file(path, content);
}

Wordlist load_oracle_wordlist(const std::filesystem::path& path, const LanguageCode& lang) {
  Wordlist out = load_wordlist(path, lang, ConceptSource::kOracle);
  if (out.size() == 0) throw Error(ErrorCode::kEmptyCorpus, "oracle wordlist " + path.string() + " has no tokens");
  return out;
}

OracleMap load_oracle_map(const std::filesystem::path& path) {
  OracleMap out;
  for_each_jsonl(path, [&](const nlohmann::json& obj, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    std::string image_id = require_string(obj, "image_id", where);
    auto it = obj.find("concepts");
    if (it == obj.end() || !it->is_array()) throw Error(ErrorCode::kCorruptFile, where + ": missing 'concepts' array");
    std::vector<std::string> concepts;
    for (const auto& c : *it) {
      if (!c.is_string()) throw Error(ErrorCode::kCorruptFile, where + ": non-string concept");
      std::string token = trim(c.get<std::string>());
      if (!token.empty()) concepts.push_back(std::move(token));
    }
    if (!out.emplace(image_id, std::move(concepts)).second) {
      throw Error(ErrorCode::kKeyCollision, where + ": duplicate image_id '" + image_id + "'");
    }
  });
  return out;
}

}  // namespace ragcap
