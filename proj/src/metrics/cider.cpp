#include "ragcap/metrics/cider.hpp"

#include <cmath>
#include <unordered_set>

#include "ragcap/core/error.hpp"

namespace ragcap::metrics {

namespace {

struct TfIdfVector {
  std::array<std::unordered_map<std::string, double>, kMaxOrder> weights;
  std::array<double, kMaxOrder> norms{};
  std::size_t length = 0;
};

TfIdfVector vectorize(std::span<const std::string> tokens, const IdfTable& idf) {
  TfIdfVector v;
  const NGramTable counts = count_ngrams(tokens);
  for (int n = 0; n < kMaxOrder; ++n) {
    double sq = 0.0;
    for (const auto& [gram, tf] : counts[static_cast<std::size_t>(n)]) {
      const double w = tf * idf.idf(n + 1, gram);
      v.weights[static_cast<std::size_t>(n)].emplace(gram, w);
      sq += w * w;
    }
    v.norms[static_cast<std::size_t>(n)] = std::sqrt(sq);
  }
  v.length = tokens.size();
  return v;
}

std::array<double, kMaxOrder> similarity(const TfIdfVector& cand, const TfIdfVector& ref) {
  const double delta = static_cast<double>(cand.length) - static_cast<double>(ref.length);
  const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
  std::array<double, kMaxOrder> val{};
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    double acc = 0.0;
    for (const auto& [gram, w] : cand.weights[n]) {
      auto it = ref.weights[n].find(gram);
      if (it == ref.weights[n].end()) continue;
      acc += std::min(w, it->second) * it->second;
    }
    if (cand.norms[n] != 0.0 && ref.norms[n] != 0.0) acc /= cand.norms[n] * ref.norms[n];
    val[n] = acc * penalty;
  }
  return val;
}

}  // namespace

IdfTable::IdfTable(std::size_t images, std::array<std::unordered_map<std::string, int>, kMaxOrder> df)
    : images_(images), log_images_(std::log(static_cast<double>(images))), df_(std::move(df)) {}

int IdfTable::df(int order, const std::string& ngram) const {
  const auto& table = df_[static_cast<std::size_t>(order - 1)];
  auto it = table.find(ngram);
  return it == table.end() ? 0 : it->second;
}

double IdfTable::idf(int order, const std::string& ngram) const {
  return log_images_ - std::log(std::max(1.0, static_cast<double>(df(order, ngram))));
}

IdfTable compute_idf(std::span<const TokenizedInstance> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot compute idf over zero images");
  std::array<std::unordered_map<std::string, int>, kMaxOrder> df;
  for (const auto& inst : corpus) {
    std::array<std::unordered_set<std::string>, kMaxOrder> present;
    for (const auto& ref : inst.references) {
      const NGramTable counts = count_ngrams(ref);
      for (std::size_t n = 0; n < kMaxOrder; ++n) {
        for (const auto& [gram, c] : counts[n]) present[n].insert(gram);
      }
    }
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
      for (const auto& gram : present[n]) ++df[n][gram];
    }
  }
  return IdfTable(corpus.size(), std::move(df));
}

CorpusScore cider_d(std::span<const TokenizedInstance> corpus, const IdfTable& idf) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot score zero images");
  CorpusScore out;
  out.metric = Metric::kCiderD;
  out.per_image.reserve(corpus.size());
  double total = 0.0;
  for (const auto& inst : corpus) {
    if (inst.references.empty()) {
      throw Error(ErrorCode::kMissingReference, "image '" + inst.image_id + "' has no references");
    }
    if (inst.candidate.empty()) ++out.empty_candidates;
    const TfIdfVector cand = vectorize(inst.candidate, idf);
    std::array<double, kMaxOrder> sum{};
    for (const auto& ref_tokens : inst.references) {
      const auto val = similarity(cand, vectorize(ref_tokens, idf));
      for (std::size_t n = 0; n < kMaxOrder; ++n) sum[n] += val[n];
    }
    double mean = 0.0;
    for (double s : sum) mean += s;
    mean /= kMaxOrder;
    const double score = mean / static_cast<double>(inst.references.size()) * kCiderScale;
    out.per_image.emplace_back(inst.image_id, score);
    total += score;
  }
  out.value = total / static_cast<double>(corpus.size());
  return out;
}

CorpusScore cider_d(std::span<const TokenizedInstance> corpus) { return cider_d(corpus, compute_idf(corpus)); }

}  // namespace ragcap::metrics
