#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ragcap {

// Row-major float32 vectors keyed by string ids.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(std::size_t dim);
  // values.size() must equal ids.size() * dim.
  EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> values);

  void reserve(std::size_t rows);
  void append(std::string id, std::span<const float> row);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::span<const float> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  std::span<float> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  const std::vector<float>& values() const noexcept { return values_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> values_;
};

// Float64-accumulated kernels.
double dot(std::span<const float> a, std::span<const float> b) noexcept;
double l2_norm(std::span<const float> v) noexcept;

constexpr double kZeroNormThreshold = 1e-12;

// Normalizes one row in place. Throws ZeroVector (naming `id`) for norm < 1e-12.
void normalize_row(std::span<float> row, const std::string& id);

// Divides every row by its L2 norm. Throws ZeroVector on the first degenerate row.
EmbeddingMatrix normalize_rows(EmbeddingMatrix matrix);

// .cemb: "CEMB", u32 version=1, u32 dim, u64 count, then per row
// u32 id length, id bytes, dim x float32. Little-endian, no padding.
inline constexpr char kCembMagic[4] = {'C', 'E', 'M', 'B'};
inline constexpr std::uint32_t kCembVersion = 1;

// Streams rows out of a .cemb file without materializing the matrix.
class CembReader {
 public:
  explicit CembReader(const std::filesystem::path& path);

  std::uint32_t dim() const noexcept { return dim_; }
  std::uint64_t count() const noexcept { return count_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  // Fills id/row with the next record; returns false once `count` rows were read.
  bool next(std::string& id, std::vector<float>& row);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::uint32_t dim_ = 0;
  std::uint64_t count_ = 0;
  std::uint64_t read_ = 0;
};

EmbeddingMatrix read_cemb(const std::filesystem::path& path);
// Concatenates shards; every shard must share one dim.
EmbeddingMatrix read_cemb(std::span<const std::filesystem::path> paths);
void write_cemb(const std::filesystem::path& path, const EmbeddingMatrix& matrix);

}  // namespace ragcap
