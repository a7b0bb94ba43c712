#include "ragcap/metrics/ngram.hpp"

namespace ragcap::metrics {

NGramTable count_ngrams(std::span<const std::string> tokens) {
  NGramTable table;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string key;
    for (int n = 1; n <= kMaxOrder && i + static_cast<std::size_t>(n) <= tokens.size(); ++n) {
      if (n > 1) key += '\x1f';
      key += tokens[i + static_cast<std::size_t>(n) - 1];
      ++table[static_cast<std::size_t>(n - 1)][key];
    }
  }
  return table;
}

}  // namespace ragcap::metrics
