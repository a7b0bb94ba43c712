#include "ragcap/index/dense_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "ragcap/core/error.hpp"

namespace ragcap {

namespace {

constexpr double kUnitTolerance = 1e-6;

}  // namespace

DenseIndex::DenseIndex(EmbeddingMatrix matrix, IndexMeta meta, std::unordered_map<std::string, std::size_t> lookup)
    : matrix_(std::move(matrix)), meta_(std::move(meta)), lookup_(std::move(lookup)) {}

DenseIndex DenseIndex::build(EmbeddingMatrix matrix, IndexMeta meta) {
  if (matrix.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot index an empty matrix");
  std::unordered_map<std::string, std::size_t> lookup;
  lookup.reserve(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    if (!lookup.emplace(matrix.id(i), i).second) {
      throw Error(ErrorCode::kDuplicateId, "'" + matrix.id(i) + "' appears more than once");
    }
    const double norm = l2_norm(matrix.row(i));
    if (!(std::abs(norm - 1.0) <= kUnitTolerance)) normalize_row(matrix.row(i), matrix.id(i));
  }
  return DenseIndex(std::move(matrix), std::move(meta), std::move(lookup));
}

std::optional<std::size_t> DenseIndex::offset_of(std::string_view id) const {
  auto it = lookup_.find(std::string(id));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void DenseIndex::check_query(std::span<const float> query) const {
  if (query.size() != dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "query dim " + std::to_string(query.size()) + " != index dim " + std::to_string(dim()));
  }
}

std::vector<double> DenseIndex::score_all(std::span<const float> query) const {
  std::vector<double> scores(size());
  for (std::size_t i = 0; i < size(); ++i) scores[i] = dot(query, matrix_.row(i));
  return scores;
}

RetrievalResult DenseIndex::search_topk(std::span<const float> query, std::size_t k, std::string query_id) const {
  check_query(query);
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  const auto scores = score_all(query);
  const auto& ids = matrix_.ids();
  auto before = [&](std::size_t a, std::size_t b) { return ranks_before(scores[a], ids[a], scores[b], ids[b]); };

  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t take = std::min(k, size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), before);

  RetrievalResult result{std::move(query_id), {}};
  result.hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) result.hits.push_back({ids[order[i]], scores[order[i]]});
  return result;
}

RetrievalResult DenseIndex::search_where(std::span<const float> query, std::size_t k,
                                         const std::function<bool(const RetrievalHit&)>& accept,
                                         std::string query_id) const {
  check_query(query);
  const auto scores = score_all(query);
  const auto& ids = matrix_.ids();
  // Max-heap by ranking order; popping yields rows best-first.
  auto after = [&](std::size_t a, std::size_t b) { return ranks_before(scores[b], ids[b], scores[a], ids[a]); };
  std::vector<std::size_t> heap(size());
  std::iota(heap.begin(), heap.end(), 0);
  std::make_heap(heap.begin(), heap.end(), after);

  RetrievalResult result{std::move(query_id), {}};
  while (result.hits.size() < k && !heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), after);
    const std::size_t row = heap.back();
    heap.pop_back();
    RetrievalHit hit{ids[row], scores[row]};
    if (accept(hit)) result.hits.push_back(std::move(hit));
  }
  return result;
}

std::vector<RetrievalResult> DenseIndex::search_batch(const EmbeddingMatrix& queries, std::size_t k,
                                                      unsigned threads) const {
  if (queries.dim() != dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "query dim " + std::to_string(queries.dim()) + " != index dim " + std::to_string(dim()));
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  std::vector<RetrievalResult> results(queries.rows());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, queries.rows())));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) results[q] = search_topk(queries.row(q), k, queries.id(q));
  };
  if (threads <= 1) {
    work(0, queries.rows());
    return results;
  }
  const std::size_t chunk = (queries.rows() + threads - 1) / threads;
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(queries.rows(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  pool.clear();  // joins
  return results;
}

}  // namespace ragcap
