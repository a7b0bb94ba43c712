#pragma once

#include <array>
#include <span>
#include <string>
#include <unordered_map>

#include "ragcap/metrics/ngram.hpp"
#include "ragcap/metrics/scores.hpp"

namespace ragcap::metrics {

// CIDEr-D constants; part of the metric definition, not configuration.
inline constexpr double kCiderSigma = 6.0;
inline constexpr double kCiderScale = 10.0;

// Document frequencies over reference sets: df(w) counts images whose
// references contain w at least once.
class IdfTable {
 public:
  IdfTable(std::size_t images, std::array<std::unordered_map<std::string, int>, kMaxOrder> df);

  std::size_t images() const noexcept { return images_; }
  int df(int order, const std::string& ngram) const;
  // log(N / max(1, df)). Unseen n-grams get log N, as in the reference
  // implementation.
  double idf(int order, const std::string& ngram) const;

 private:
  std::size_t images_;
  double log_images_;
  std::array<std::unordered_map<std::string, int>, kMaxOrder> df_;
};

// Throws EmptyCorpus.
IdfTable compute_idf(std::span<const TokenizedInstance> corpus);

// Per-image score: scale/|refs| * mean over n=1..4 of
//   sum_refs exp(-(len_c - len_r)^2 / (2 sigma^2)) * <min(g_c, g_r), g_r> / (|g_c| |g_r|)
// with g the tf-idf vectors of order n and 0/0 taken as 0. Corpus value is
// the mean of per-image scores.
CorpusScore cider_d(std::span<const TokenizedInstance> corpus, const IdfTable& idf);

// Convenience: idf from the same corpus.
CorpusScore cider_d(std::span<const TokenizedInstance> corpus);

}  // namespace ragcap::metrics
