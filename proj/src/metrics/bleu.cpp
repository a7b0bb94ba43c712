#include "ragcap/metrics/bleu.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "ragcap/core/error.hpp"
#include "ragcap/metrics/ngram.hpp"

namespace ragcap::metrics {

CorpusScore bleu4(std::span<const TokenizedInstance> corpus, BleuSmoothing smoothing) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot score zero images");
  std::array<double, kMaxOrder> matched{};
  std::array<double, kMaxOrder> total{};
  double cand_len = 0.0;
  double ref_len = 0.0;
  CorpusScore out;
  out.metric = Metric::kBleu4;

  for (const auto& inst : corpus) {
    if (inst.references.empty()) {
      throw Error(ErrorCode::kMissingReference, "image '" + inst.image_id + "' has no references");
    }
    if (inst.candidate.empty()) ++out.empty_candidates;
    const NGramTable cand = count_ngrams(inst.candidate);
    NGramTable max_ref;
    std::size_t closest = inst.references.front().size();
    for (const auto& ref : inst.references) {
      const auto diff = [&](std::size_t len) {
        return std::llabs(static_cast<long long>(len) - static_cast<long long>(inst.candidate.size()));
      };
      if (diff(ref.size()) < diff(closest) || (diff(ref.size()) == diff(closest) && ref.size() < closest)) {
        closest = ref.size();
      }
      const NGramTable counts = count_ngrams(ref);
      for (std::size_t n = 0; n < kMaxOrder; ++n) {
        for (const auto& [gram, c] : counts[n]) {
          int& slot = max_ref[n][gram];
          slot = std::max(slot, c);
        }
      }
    }
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
      for (const auto& [gram, c] : cand[n]) {
        auto it = max_ref[n].find(gram);
        if (it != max_ref[n].end()) matched[n] += std::min(c, it->second);
        total[n] += c;
      }
    }
    cand_len += static_cast<double>(inst.candidate.size());
    ref_len += static_cast<double>(closest);
  }

  if (cand_len == 0.0) return out;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    double num = matched[n];
    double den = total[n];
    if (smoothing == BleuSmoothing::kAddOne && n > 0) {
      num += 1.0;
      den += 1.0;
    }
    if (num == 0.0 || den == 0.0) return out;
    log_sum += std::log(num / den);
  }
  const double brevity = cand_len < ref_len ? std::exp(1.0 - ref_len / cand_len) : 1.0;
  out.value = brevity * std::exp(log_sum / kMaxOrder);
  return out;
}

}  // namespace ragcap::metrics
