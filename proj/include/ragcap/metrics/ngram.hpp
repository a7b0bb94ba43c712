#pragma once

#include <array>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ragcap::metrics {

inline constexpr int kMaxOrder = 4;

// N-gram keys are tokens joined by U+001F, which tokenizers never emit.
using NGramCounts = std::unordered_map<std::string, int>;
using NGramTable = std::array<NGramCounts, kMaxOrder>;

// counts[n-1] holds every n-gram of order n (1..4).
NGramTable count_ngrams(std::span<const std::string> tokens);

}  // namespace ragcap::metrics
