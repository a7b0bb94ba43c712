#include "ragcap/core/records.hpp"

#include "ragcap/core/error.hpp"

namespace ragcap {

std::string_view to_string(ConceptSource source) noexcept {
  switch (source) {
    case ConceptSource::kCoco: return "coco";
    case ConceptSource::kXm3600: return "xm3600";
    case ConceptSource::kPangea: return "pangea";
    case ConceptSource::kWiki: return "wiki";
    case ConceptSource::kOracle: return "oracle";
  }
  return "coco";
}

ConceptSource parse_concept_source(std::string_view name) {
  for (auto s : {ConceptSource::kCoco, ConceptSource::kXm3600, ConceptSource::kPangea, ConceptSource::kWiki,
                 ConceptSource::kOracle}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown concept source '" + std::string(name) + "'");
}

std::string_view to_string(RetrievalMode mode) noexcept {
  return mode == RetrievalMode::kPivotEn ? "pivot_en" : "direct";
}

RetrievalMode parse_retrieval_mode(std::string_view name) {
  if (name == "pivot_en") return RetrievalMode::kPivotEn;
  if (name == "direct") return RetrievalMode::kDirect;
  throw Error(ErrorCode::kInvalidArgument, "unknown retrieval mode '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidArgument, what); };
  if (n_captions < 0) fail("n_captions must be >= 0");
  if (m_concepts < 0) fail("m_concepts must be >= 0");
  if (beam_size < 1) fail("beam_size must be >= 1");
  if (max_tokens < 1) fail("max_tokens must be >= 1");
}

void to_json(nlohmann::json& j, const LanguageCode& v) {
  j = nlohmann::json{{"code", v.code}, {"display_name", v.display_name}};
}
void from_json(const nlohmann::json& j, LanguageCode& v) {
  j.at("code").get_to(v.code);
  j.at("display_name").get_to(v.display_name);
}

void to_json(nlohmann::json& j, const CaptionRecord& v) {
  j = nlohmann::json{{"caption_id", v.caption_id}, {"image_id", v.image_id}, {"lang", v.lang}, {"text", v.text}};
}
void from_json(const nlohmann::json& j, CaptionRecord& v) {
  j.at("caption_id").get_to(v.caption_id);
  j.at("image_id").get_to(v.image_id);
  j.at("lang").get_to(v.lang);
  j.at("text").get_to(v.text);
}

void to_json(nlohmann::json& j, const ConceptEntry& v) {
  j = nlohmann::json{{"token", v.token}, {"lang", v.lang}, {"source", to_string(v.source)}, {"wrapped", v.wrapped}};
}
void from_json(const nlohmann::json& j, ConceptEntry& v) {
  j.at("token").get_to(v.token);
  j.at("lang").get_to(v.lang);
  v.source = parse_concept_source(j.at("source").get<std::string>());
  j.at("wrapped").get_to(v.wrapped);
}

void to_json(nlohmann::json& j, const RetrievalHit& v) { j = nlohmann::json{{"id", v.id}, {"score", v.score}}; }
void from_json(const nlohmann::json& j, RetrievalHit& v) {
  j.at("id").get_to(v.id);
  j.at("score").get_to(v.score);
}

void to_json(nlohmann::json& j, const RetrievalResult& v) {
  j = nlohmann::json{{"query_id", v.query_id}, {"hits", v.hits}};
}
void from_json(const nlohmann::json& j, RetrievalResult& v) {
  j.at("query_id").get_to(v.query_id);
  j.at("hits").get_to(v.hits);
}

void to_json(nlohmann::json& j, const PromptSpec& v) {
  j = nlohmann::json{{"captions", v.captions}, {"concepts", v.concepts}, {"lang", v.lang}};
}
void from_json(const nlohmann::json& j, PromptSpec& v) {
  j.at("captions").get_to(v.captions);
  j.at("concepts").get_to(v.concepts);
  j.at("lang").get_to(v.lang);
}

void to_json(nlohmann::json& j, const RunConfig& v) {
  j = nlohmann::json{{"n_captions", v.n_captions},
                     {"m_concepts", v.m_concepts},
                     {"beam_size", v.beam_size},
                     {"length_penalty", v.length_penalty},
                     {"max_tokens", v.max_tokens},
                     {"retrieval_mode", to_string(v.retrieval_mode)}};
}
void from_json(const nlohmann::json& j, RunConfig& v) {
  j.at("n_captions").get_to(v.n_captions);
  j.at("m_concepts").get_to(v.m_concepts);
  j.at("beam_size").get_to(v.beam_size);
  j.at("length_penalty").get_to(v.length_penalty);
  j.at("max_tokens").get_to(v.max_tokens);
  v.retrieval_mode = parse_retrieval_mode(j.at("retrieval_mode").get<std::string>());
}

std::string trim(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\v\f";
  auto begin = text.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(kSpace);
  return std::string(text.substr(begin, end - begin + 1));
}

}  // namespace ragcap
