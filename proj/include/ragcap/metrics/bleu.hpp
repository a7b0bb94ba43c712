#pragma once

#include <span>

#include "ragcap/metrics/scores.hpp"

namespace ragcap::metrics {

enum class BleuSmoothing { kNone, kAddOne };

// Corpus BLEU-4: modified n-gram precisions (candidate counts clipped by the
// max count in any single reference) pooled over the corpus, uniform
// geometric mean, times exp(1 - r/c) when c < r, where r sums each
// segment's closest reference length (shorter wins ties). Without smoothing
// a zero precision at any order yields 0. Add-one smoothing applies to
// orders 2-4 only.
CorpusScore bleu4(std::span<const TokenizedInstance> corpus, BleuSmoothing smoothing = BleuSmoothing::kNone);

}  // namespace ragcap::metrics
