#include "ragcap/retrieval/retriever.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <unordered_set>

#include "ragcap/core/error.hpp"

namespace ragcap {

nlohmann::json bundle_to_json(const AugmentationBundle& bundle) {
  nlohmann::json captions = nlohmann::json::array();
  for (const auto& c : bundle.captions) captions.push_back({{"id", c.caption_id}, {"text", c.text}, {"score", c.score}});
  nlohmann::json concepts = nlohmann::json::array();
  for (const auto& c : bundle.concepts) concepts.push_back({{"token", c.token}, {"score", c.score}});
  return nlohmann::json{{"image_id", bundle.image_id},
                        {"captions", std::move(captions)},
                        {"concepts", std::move(concepts)},
                        {"mode", to_string(bundle.mode)}};
}

AugmentationBundle bundle_from_json(const nlohmann::json& j) {
  AugmentationBundle bundle;
  try {
    j.at("image_id").get_to(bundle.image_id);
    for (const auto& c : j.at("captions")) {
      bundle.captions.push_back({c.value("id", std::string()), c.at("text").get<std::string>(), c.at("score").get<double>()});
    }
    for (const auto& c : j.at("concepts")) {
      bundle.concepts.push_back({c.at("token").get<std::string>(), c.at("score").get<double>()});
    }
    bundle.mode = parse_retrieval_mode(j.at("mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("malformed bundle: ") + e.what());
  }
  return bundle;
}

namespace {

void require_kind(const DenseIndex& index, IndexKind kind) {
  if (index.meta().kind != kind) {
    throw Error(ErrorCode::kModeMismatch, "expected a " + std::string(to_string(kind)) + " index, got " +
                                              std::string(to_string(index.meta().kind)));
  }
}

const std::string& image_of(const RetrievalOptions& options, const std::string& caption_id) {
  auto it = options.caption_images->find(caption_id);
  if (it == options.caption_images->end()) {
    throw Error(ErrorCode::kInvalidArgument, "no image id known for caption '" + caption_id + "'");
  }
  return it->second;
}

}  // namespace

std::vector<ScoredCaption> retrieve_captions(std::span<const float> query, std::string_view image_id,
                                             const DenseIndex& index, const RunConfig& cfg, const PivotMap& texts,
                                             const LanguageCode& target, const RetrievalOptions& options) {
  require_kind(index, IndexKind::kCaption);
  const std::string& index_lang = index.meta().lang;
  if (cfg.retrieval_mode == RetrievalMode::kPivotEn && index_lang != "en") {
    throw Error(ErrorCode::kModeMismatch, "pivot_en retrieval needs an English caption index, got '" + index_lang + "'");
  }
  if (cfg.retrieval_mode == RetrievalMode::kDirect && index_lang != target.code) {
    throw Error(ErrorCode::kModeMismatch,
                "direct retrieval needs a '" + target.code + "' caption index, got '" + index_lang + "'");
  }
  if (cfg.n_captions <= 0) return {};
  const auto k = static_cast<std::size_t>(cfg.n_captions);

  const bool filtered = options.exclude_image_id || options.max_per_image.has_value() || options.dedup_texts;
  if (filtered && (options.exclude_image_id || options.max_per_image) && options.caption_images == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "image-based caption filters need a caption -> image map");
  }

  RetrievalResult result;
  if (!filtered) {
    result = index.search_topk(query, k, std::string(image_id));
  } else {
    std::unordered_map<std::string, int> per_image;
    std::unordered_set<std::string> seen_texts;
    result = index.search_where(
        query, k,
        [&](const RetrievalHit& hit) {
          if (options.exclude_image_id || options.max_per_image) {
            const std::string& source = image_of(options, hit.id);
            if (options.exclude_image_id && source == image_id) return false;
            if (options.max_per_image && per_image[source] >= *options.max_per_image) return false;
            if (options.dedup_texts && !seen_texts.insert(texts.lookup(hit.id, target.code)).second) return false;
            ++per_image[source];
            return true;
          }
          return seen_texts.insert(texts.lookup(hit.id, target.code)).second;
        },
        std::string(image_id));
  }

  std::vector<ScoredCaption> out;
  out.reserve(result.hits.size());
  for (auto& hit : result.hits) {
    const std::string& text = texts.lookup(hit.id, target.code);
    out.push_back({std::move(hit.id), text, hit.score});
  }
  return out;
}

std::vector<ScoredConcept> retrieve_concepts(std::span<const float> query, const DenseIndex& index,
                                             const RunConfig& cfg) {
  require_kind(index, IndexKind::kConcept);
  if (cfg.m_concepts <= 0) return {};
  auto result = index.search_topk(query, static_cast<std::size_t>(cfg.m_concepts));
  std::vector<ScoredConcept> out;
  out.reserve(result.hits.size());
  for (auto& hit : result.hits) out.push_back({std::move(hit.id), hit.score});
  return out;
}

BatchOutcome retrieve_batch(const EmbeddingMatrix& queries, const DenseIndex* caption_index,
                            const DenseIndex* concept_index, const RunConfig& cfg, const PivotMap* texts,
                            const LanguageCode& target, const OracleMap* oracle, const RetrievalOptions& options) {
  cfg.validate();
  const bool want_captions = cfg.n_captions > 0;
  const bool want_concepts = cfg.m_concepts > 0;
  if (want_captions && (caption_index == nullptr || texts == nullptr)) {
    throw Error(ErrorCode::kInvalidArgument, "n_captions > 0 needs a caption index and a caption text map");
  }
  if (want_concepts && concept_index == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "m_concepts > 0 needs a concept index");
  }
  if (want_concepts) {
    require_kind(*concept_index, IndexKind::kConcept);
    if (concept_index->meta().lang != target.code) {
      throw Error(ErrorCode::kModeMismatch, "concept index is '" + concept_index->meta().lang + "', target is '" +
                                                target.code + "'");
    }
    if (concept_index->dim() != queries.dim()) {
      throw Error(ErrorCode::kDimMismatch, "query dim " + std::to_string(queries.dim()) + " != concept index dim " +
                                               std::to_string(concept_index->dim()));
    }
  }
  if (want_captions && caption_index->dim() != queries.dim()) {
    throw Error(ErrorCode::kDimMismatch, "query dim " + std::to_string(queries.dim()) + " != caption index dim " +
                                             std::to_string(caption_index->dim()));
  }

  const std::size_t n = queries.rows();
  std::vector<std::optional<AugmentationBundle>> slots(n);
  std::vector<std::optional<std::string>> errors(n);
  std::vector<std::exception_ptr> fatal(n);

  auto run_one = [&](std::size_t q) {
    try {
      AugmentationBundle bundle;
      bundle.image_id = queries.id(q);
      bundle.mode = cfg.retrieval_mode;
      if (want_captions) {
        bundle.captions =
            retrieve_captions(queries.row(q), bundle.image_id, *caption_index, cfg, *texts, target, options);
      }
      const std::vector<std::string>* curated = nullptr;
      if (oracle != nullptr) {
        if (auto it = oracle->find(bundle.image_id); it != oracle->end()) curated = &it->second;
      }
      if (curated != nullptr) {
        const auto take = std::min<std::size_t>(curated->size(), static_cast<std::size_t>(cfg.m_concepts));
        for (std::size_t i = 0; i < take; ++i) bundle.concepts.push_back({(*curated)[i], 1.0});
      } else if (want_concepts) {
        bundle.concepts = retrieve_concepts(queries.row(q), *concept_index, cfg);
      }
      slots[q] = std::move(bundle);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPivotMiss) {
        fatal[q] = std::current_exception();
        return;
      }
      errors[q] = e.what();
    } catch (...) {
      fatal[q] = std::current_exception();
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n)));
  if (threads <= 1) {
    for (std::size_t q = 0; q < n; ++q) run_one(q);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&run_one, begin, end] {
        for (std::size_t q = begin; q < end; ++q) run_one(q);
      });
    }
  }

  for (const auto& e : fatal) {
    if (e) std::rethrow_exception(e);
  }
  BatchOutcome outcome;
  for (std::size_t q = 0; q < n; ++q) {
    if (slots[q]) {
      outcome.bundles.push_back(std::move(*slots[q]));
    } else if (errors[q]) {
      outcome.failures.push_back({queries.id(q), *errors[q]});
    }
  }
  return outcome;
}

}  // namespace ragcap
