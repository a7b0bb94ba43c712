#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ragcap/core/language.hpp"

namespace ragcap {

struct CaptionRecord {
  std::string caption_id;
  std::string image_id;
  LanguageCode lang;
  std::string text;

  bool operator==(const CaptionRecord&) const = default;
};

enum class ConceptSource { kCoco, kXm3600, kPangea, kWiki, kOracle };

std::string_view to_string(ConceptSource source) noexcept;
ConceptSource parse_concept_source(std::string_view name);

struct ConceptEntry {
  std::string token;
  LanguageCode lang;
  ConceptSource source = ConceptSource::kCoco;
  // Template-applied form; only ever embedded, never shown to the generator.
  std::string wrapped;

  bool operator==(const ConceptEntry&) const = default;
};

struct RetrievalHit {
  std::string id;
  double score = 0.0;

  bool operator==(const RetrievalHit&) const = default;
};

// Hits are score-descending, ties broken by ascending id bytes.
struct RetrievalResult {
  std::string query_id;
  std::vector<RetrievalHit> hits;

  bool operator==(const RetrievalResult&) const = default;
};

// Strict ranking order shared by every retrieval path.
inline bool ranks_before(double score_a, std::string_view id_a, double score_b, std::string_view id_b) noexcept {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

struct PromptSpec {
  std::vector<std::string> captions;
  std::vector<std::string> concepts;
  LanguageCode lang;

  bool operator==(const PromptSpec&) const = default;
};

enum class RetrievalMode { kPivotEn, kDirect };

std::string_view to_string(RetrievalMode mode) noexcept;
RetrievalMode parse_retrieval_mode(std::string_view name);

struct RunConfig {
  int n_captions = 4;
  int m_concepts = 10;
  int beam_size = 5;
  double length_penalty = 1.0;
  int max_tokens = 25;
  RetrievalMode retrieval_mode = RetrievalMode::kDirect;

  // Throws InvalidArgument on the first violated bound.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

void to_json(nlohmann::json& j, const LanguageCode& v);
void from_json(const nlohmann::json& j, LanguageCode& v);
void to_json(nlohmann::json& j, const CaptionRecord& v);
void from_json(const nlohmann::json& j, CaptionRecord& v);
void to_json(nlohmann::json& j, const ConceptEntry& v);
void from_json(const nlohmann::json& j, ConceptEntry& v);
void to_json(nlohmann::json& j, const RetrievalHit& v);
void from_json(const nlohmann::json& j, RetrievalHit& v);
void to_json(nlohmann::json& j, const RetrievalResult& v);
void from_json(const nlohmann::json& j, RetrievalResult& v);
void to_json(nlohmann::json& j, const PromptSpec& v);
void from_json(const nlohmann::json& j, PromptSpec& v);
void to_json(nlohmann::json& j, const RunConfig& v);
void from_json(const nlohmann::json& j, RunConfig& v);

// Strips leading/trailing ASCII whitespace.
std::string trim(std::string_view text);

}  // namespace ragcap
