#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragcap/concepts/wordlist.hpp"
#include "ragcap/core/records.hpp"
#include "ragcap/index/dense_index.hpp"
#include "ragcap/retrieval/pivot_map.hpp"

namespace ragcap {

struct ScoredCaption {
  std::string caption_id;
  std::string text;
  double score = 0.0;

  bool operator==(const ScoredCaption&) const = default;
};

struct ScoredConcept {
  std::string token;
  double score = 0.0;

  bool operator==(const ScoredConcept&) const = default;
};

// Retrieved context for one image, ready for prompt assembly.
struct AugmentationBundle {
  std::string image_id;
  std::vector<ScoredCaption> captions;
  std::vector<ScoredConcept> concepts;
  RetrievalMode mode = RetrievalMode::kDirect;

  bool operator==(const AugmentationBundle&) const = default;
};

nlohmann::json bundle_to_json(const AugmentationBundle& bundle);
AugmentationBundle bundle_from_json(const nlohmann::json& j);

// Optional caption filters. The image-based ones need `caption_images`
// (caption_id -> image_id).
struct RetrievalOptions {
  bool exclude_image_id = false;     // drop captions of the query image itself
  std::optional<int> max_per_image;  // cap captions per source image
  bool dedup_texts = false;          // drop repeated texts after pivot mapping
  const std::unordered_map<std::string, std::string>* caption_images = nullptr;
  unsigned threads = 0;  // retrieve_batch workers; 0 = hardware concurrency
};

// Top n_captions captions for one image. In pivot_en mode the index must be
// English and hits are mapped to `target` through `texts` by caption id,
// keeping the English-space scores. In direct mode the index language must
// equal `target` and `texts` supplies the target-language text.
// Throws PivotMiss, ModeMismatch, DimMismatch.
std::vector<ScoredCaption> retrieve_captions(std::span<const float> query, std::string_view image_id,
                                             const DenseIndex& index, const RunConfig& cfg, const PivotMap& texts,
                                             const LanguageCode& target, const RetrievalOptions& options = {});

// Top m_concepts raw tokens (index ids are the raw tokens; rows embed the
// template-wrapped form).
std::vector<ScoredConcept> retrieve_concepts(std::span<const float> query, const DenseIndex& index,
                                             const RunConfig& cfg);

struct BatchFailure {
  std::string image_id;
  std::string message;
};

struct BatchOutcome {
  std::vector<AugmentationBundle> bundles;  // input order, failed queries omitted
  std::vector<BatchFailure> failures;       // input order
};

// One bundle per query row (row ids are image ids). Either index may be null
// when the corresponding count is zero. Oracle concepts, when present for
// an image, replace retrieval with score 1.0, truncated to m_concepts.
// PivotMiss fails only the affected query.
BatchOutcome retrieve_batch(const EmbeddingMatrix& queries, const DenseIndex* caption_index,
                            const DenseIndex* concept_index, const RunConfig& cfg, const PivotMap* texts,
                            const LanguageCode& target, const OracleMap* oracle = nullptr,
                            const RetrievalOptions& options = {});

}  // namespace ragcap
