#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragcap/concepts/tokenizer.hpp"
#include "ragcap/metrics/bleu.hpp"
#include "ragcap/metrics/cider.hpp"

namespace ragcap::metrics {

std::vector<TokenizedInstance> tokenize_corpus(std::span<const EvalInstance> corpus,
                                               const Tokenizer& tokenizer = default_tokenizer());

// Predictions JSON-lines {"image_id", "caption"}; references JSON-lines
// {"image_id", "captions": [..]}. Joined on image_id in prediction order.
// Throws MissingReference (listing ids) and KeyCollision.
std::vector<EvalInstance> join_predictions(const std::filesystem::path& predictions,
                                           const std::filesystem::path& references, const LanguageCode& lang);

struct EvalReport {
  LanguageCode lang;
  std::size_t n_images = 0;
  std::string tokenizer;  // adapter that ran for `lang`
  std::vector<CorpusScore> scores;

  // One report object per metric:
  // {"metric", "corpus", "per_image", "lang", "n_images", "tokenizer"}.
  nlohmann::json metric_json(std::size_t i) const;
  // A single metric serializes to its report object, several to an array.
  nlohmann::json to_json() const;
};

struct EvalOptions {
  std::vector<Metric> metrics{Metric::kCiderD};
  BleuSmoothing smoothing = BleuSmoothing::kNone;
  const Tokenizer* tokenizer = nullptr;  // null = default tokenizer
};

EvalReport evaluate(std::span<const EvalInstance> corpus, const LanguageCode& lang, const EvalOptions& options = {});

EvalReport evaluate_run(const std::filesystem::path& predictions, const std::filesystem::path& references,
                        const LanguageCode& lang, const EvalOptions& options = {});

}  // namespace ragcap::metrics
