#include "ragcap/metrics/evaluate.hpp"

#include <iostream>
#include <map>
#include <unordered_set>

#include "ragcap/core/error.hpp"
#include "ragcap/core/jsonl.hpp"

namespace ragcap::metrics {

std::string_view to_string(Metric metric) noexcept { return metric == Metric::kCiderD ? "cider_d" : "bleu4"; }

Metric parse_metric(std::string_view name) {
  if (name == "cider_d" || name == "cider") return Metric::kCiderD;
  if (name == "bleu4" || name == "bleu") return Metric::kBleu4;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(name) + "'");
}

std::vector<TokenizedInstance> tokenize_corpus(std::span<const EvalInstance> corpus, const Tokenizer& tokenizer) {
  std::vector<TokenizedInstance> out;
  out.reserve(corpus.size());
  for (const auto& inst : corpus) {
    TokenizedInstance t;
    t.image_id = inst.image_id;
    t.candidate = tokenizer.tokenize(inst.lang, inst.candidate, TokenizeMode::kEval);
    for (const auto& ref : inst.references) t.references.push_back(tokenizer.tokenize(inst.lang, ref, TokenizeMode::kEval));
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<EvalInstance> join_predictions(const std::filesystem::path& predictions,
                                           const std::filesystem::path& references, const LanguageCode& lang) {
  std::map<std::string, std::vector<std::string>, std::less<>> refs;
  for_each_jsonl(references, [&](const nlohmann::json& obj, std::size_t line) {
    const std::string where = references.string() + ":" + std::to_string(line);
    std::string id = require_string(obj, "image_id", where);
    auto it = obj.find("captions");
    if (it == obj.end() || !it->is_array()) throw Error(ErrorCode::kCorruptFile, where + ": missing 'captions' array");
    std::vector<std::string> texts;
    for (const auto& c : *it) {
      if (!c.is_string()) throw Error(ErrorCode::kCorruptFile, where + ": non-string caption");
      texts.push_back(c.get<std::string>());
    }
    if (texts.empty()) throw Error(ErrorCode::kCorruptFile, where + ": empty reference list for '" + id + "'");
    if (!refs.emplace(id, std::move(texts)).second) {
      throw Error(ErrorCode::kKeyCollision, where + ": duplicate reference image_id '" + id + "'");
    }
  });

  std::vector<EvalInstance> out;
  std::unordered_set<std::string> seen;
  std::vector<std::string> missing;
  for_each_jsonl(predictions, [&](const nlohmann::json& obj, std::size_t line) {
    const std::string where = predictions.string() + ":" + std::to_string(line);
    std::string id = require_string(obj, "image_id", where);
    std::string caption = require_string(obj, "caption", where);
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kKeyCollision, where + ": duplicate prediction image_id '" + id + "'");
    }
    auto it = refs.find(id);
    if (it == refs.end()) {
      missing.push_back(id);
      return;
    }
    out.push_back(EvalInstance{id, std::move(caption), it->second, lang});
  });
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::kMissingReference, "no references for: " + ids);
  }
  return out;
}

nlohmann::json EvalReport::metric_json(std::size_t i) const {
  const CorpusScore& s = scores.at(i);
  nlohmann::json per_image = nlohmann::json::object();
  for (const auto& [id, v] : s.per_image) per_image[id] = v;
  return nlohmann::json{{"metric", to_string(s.metric)}, {"corpus", s.value},
                        {"per_image", std::move(per_image)}, {"lang", lang.code},
                        {"n_images", n_images},           {"tokenizer", tokenizer}};
}

nlohmann::json EvalReport::to_json() const {
  if (scores.size() == 1) return metric_json(0);
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < scores.size(); ++i) arr.push_back(metric_json(i));
  return arr;
}

EvalReport evaluate(std::span<const EvalInstance> corpus, const LanguageCode& lang, const EvalOptions& options) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "no predictions to evaluate");
  const Tokenizer& tokenizer = options.tokenizer != nullptr ? *options.tokenizer : default_tokenizer();
  const auto tokenized = tokenize_corpus(corpus, tokenizer);
  EvalReport report;
  report.lang = lang;
  report.n_images = tokenized.size();
  report.tokenizer = tokenizer.adapter_name(lang.code);
  for (Metric metric : options.metrics) {
    CorpusScore s = metric == Metric::kCiderD ? cider_d(tokenized) : bleu4(tokenized, options.smoothing);
    if (s.empty_candidates > 0) {
      std::cerr << "warning: " << s.empty_candidates << " empty candidate(s) scored as 0 for " << to_string(metric)
                << "\n";
    }
    report.scores.push_back(std::move(s));
  }
  return report;
}

EvalReport evaluate_run(const std::filesystem::path& predictions, const std::filesystem::path& references,
                        const LanguageCode& lang, const EvalOptions& options) {
  const auto corpus = join_predictions(predictions, references, lang);
  return evaluate(corpus, lang, options);
}

}  // namespace ragcap::metrics
