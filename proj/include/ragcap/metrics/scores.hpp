#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ragcap/core/language.hpp"

namespace ragcap::metrics {

enum class Metric { kCiderD, kBleu4 };

std::string_view to_string(Metric metric) noexcept;
// Accepts "cider_d"/"cider" and "bleu4"/"bleu".
Metric parse_metric(std::string_view name);

// Raw strings for one image, before tokenization.
struct EvalInstance {
  std::string image_id;
  std::string candidate;
  std::vector<std::string> references;  // non-empty
  LanguageCode lang;
};

struct TokenizedInstance {
  std::string image_id;
  std::vector<std::string> candidate;
  std::vector<std::vector<std::string>> references;
};

struct CorpusScore {
  Metric metric = Metric::kCiderD;
  double value = 0.0;
  // CIDEr only, in corpus order.
  std::vector<std::pair<std::string, double>> per_image;
  std::size_t empty_candidates = 0;
};

}  // namespace ragcap::metrics
