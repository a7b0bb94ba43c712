#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ragcap/core/embedding.hpp"
#include "ragcap/core/records.hpp"

namespace ragcap {

enum class IndexKind { kCaption, kConcept };

std::string_view to_string(IndexKind kind) noexcept;
IndexKind parse_index_kind(std::string_view name);

struct IndexMeta {
  std::string corpus;
  std::string lang;
  IndexKind kind = IndexKind::kCaption;
  std::string built_at;  // ISO-8601 UTC

  bool operator==(const IndexMeta&) const = default;
};

nlohmann::json meta_to_json(const IndexMeta& meta);
IndexMeta meta_from_json(const nlohmann::json& j);

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

// Exact cosine datastore. Rows are unit-norm, so cosine == dot product.
// Immutable after build; const methods are safe to call concurrently.
class DenseIndex {
 public:
  // Rows whose norm is already within 1e-6 of 1 are kept bit-for-bit; all
  // others are normalized. Throws EmptyCorpus, DuplicateId, ZeroVector.
  static DenseIndex build(EmbeddingMatrix matrix, IndexMeta meta);

  std::size_t size() const noexcept { return matrix_.rows(); }
  std::size_t dim() const noexcept { return matrix_.dim(); }
  const IndexMeta& meta() const noexcept { return meta_; }
  const EmbeddingMatrix& matrix() const noexcept { return matrix_; }
  std::optional<std::size_t> offset_of(std::string_view id) const;

  // Top min(k, size()) rows by dot product with `query`, ties by ascending id.
  RetrievalResult search_topk(std::span<const float> query, std::size_t k, std::string query_id = {}) const;

  // Walks rows in ranking order and keeps the first `k` that `accept` admits.
  // `accept` sees hits in order and may be stateful (per-image caps, dedup).
  RetrievalResult search_where(std::span<const float> query, std::size_t k,
                               const std::function<bool(const RetrievalHit&)>& accept,
                               std::string query_id = {}) const;

  // Element-wise search_topk; result i belongs to query row i. threads == 0
  // picks hardware concurrency. Output does not depend on the thread count.
  std::vector<RetrievalResult> search_batch(const EmbeddingMatrix& queries, std::size_t k,
                                            unsigned threads = 0) const;

  bool operator==(const DenseIndex& other) const {
    return meta_ == other.meta_ && matrix_ == other.matrix_;
  }

 private:
  DenseIndex(EmbeddingMatrix matrix, IndexMeta meta, std::unordered_map<std::string, std::size_t> lookup);

  void check_query(std::span<const float> query) const;
  std::vector<double> score_all(std::span<const float> query) const;

  EmbeddingMatrix matrix_;
  IndexMeta meta_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

// Index file: "CIDX", u32 version=1, u32 dim, u64 count, u32 meta length,
// meta JSON, then per row u32 id length, id bytes, dim x float32.
inline constexpr char kIndexMagic[4] = {'C', 'I', 'D', 'X'};
inline constexpr std::uint32_t kIndexVersion = 1;

void save_index(const DenseIndex& index, const std::filesystem::path& path);
DenseIndex load_index(const std::filesystem::path& path);

// Reads only the header and meta block.
struct IndexHeader {
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  IndexMeta meta;
};
IndexHeader read_index_header(const std::filesystem::path& path);

// Writes an index file row by row without holding the matrix in memory.
// Rows are normalized and checked for duplicate ids as they arrive; the row
// count in the header is patched on finish().
class IndexWriter {
 public:
  IndexWriter(const std::filesystem::path& path, std::uint32_t dim, IndexMeta meta);
  ~IndexWriter();
  IndexWriter(const IndexWriter&) = delete;
  IndexWriter& operator=(const IndexWriter&) = delete;

  void add(const std::string& id, std::span<const float> row);
  // Returns the number of rows written. Throws EmptyCorpus when none were.
  std::uint64_t finish();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint32_t dim_;
  std::uint64_t count_ = 0;
  std::streampos count_pos_;
  std::unordered_set<std::string> seen_;
  std::vector<float> scratch_;
  bool finished_ = false;
};

}  // namespace ragcap
