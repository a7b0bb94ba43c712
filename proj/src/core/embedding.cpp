#include "ragcap/core/embedding.hpp"

#include <cmath>
#include <cstring>

#include "ragcap/core/binary_io.hpp"
#include "ragcap/core/error.hpp"

namespace ragcap {

namespace {

constexpr std::uint32_t kMaxIdBytes = 1u << 20;
constexpr std::uint32_t kMaxDim = 1u << 20;

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::vector<std::string> ids, std::vector<float> values)
    : dim_(dim), ids_(std::move(ids)), values_(std::move(values)) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dim must be >= 1");
  if (values_.size() != ids_.size() * dim_) {
    throw Error(ErrorCode::kDimMismatch, "value count " + std::to_string(values_.size()) + " != rows " +
                                             std::to_string(ids_.size()) + " x dim " + std::to_string(dim_));
  }
}

void EmbeddingMatrix::reserve(std::size_t rows) {
  ids_.reserve(rows);
  values_.reserve(rows * dim_);
}

void EmbeddingMatrix::append(std::string id, std::span<const float> row) {
  if (row.size() != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                "row '" + id + "' has dim " + std::to_string(row.size()) + ", expected " + std::to_string(dim_));
  }
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), row.begin(), row.end());
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double l2_norm(std::span<const float> v) noexcept { return std::sqrt(dot(v, v)); }

void normalize_row(std::span<float> row, const std::string& id) {
  const double norm = l2_norm(row);
  if (!(norm >= kZeroNormThreshold) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kZeroVector, "row '" + id + "' has norm " + std::to_string(norm));
  }
  for (float& x : row) x = static_cast<float>(static_cast<double>(x) / norm);
}

EmbeddingMatrix normalize_rows(EmbeddingMatrix matrix) {
  for (std::size_t i = 0; i < matrix.rows(); ++i) normalize_row(matrix.row(i), matrix.id(i));
  return matrix;
}

CembReader::CembReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  char magic[4];
  std::uint32_t version = 0;
  if (!in_.read(magic, 4) || std::memcmp(magic, kCembMagic, 4) != 0) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": bad magic");
  }
  if (!binary::read_le(in_, version) || version != kCembVersion) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": unsupported version " + std::to_string(version));
  }
  if (!binary::read_le(in_, dim_) || !binary::read_le(in_, count_)) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": truncated header");
  }
  if (dim_ == 0 || dim_ > kMaxDim) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": implausible dim " + std::to_string(dim_));
  }
}

bool CembReader::next(std::string& id, std::vector<float>& row) {
  if (read_ == count_) {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw Error(ErrorCode::kCorruptFile, path_.string() + ": trailing bytes after " + std::to_string(count_) + " rows");
    }
    return false;
  }
  auto truncated = [&] {
    return Error(ErrorCode::kCorruptFile, path_.string() + ": truncated at row " + std::to_string(read_));
  };
  std::uint32_t id_len = 0;
  if (!binary::read_le(in_, id_len)) throw truncated();
  if (id_len == 0 || id_len > kMaxIdBytes) {
    throw Error(ErrorCode::kCorruptFile, path_.string() + ": bad id length at row " + std::to_string(read_));
  }
  if (!binary::read_bytes(in_, id, id_len)) throw truncated();
  row.resize(dim_);
  for (auto& x : row) {
    if (!binary::read_f32(in_, x)) throw truncated();
  }
  ++read_;
  return true;
}

EmbeddingMatrix read_cemb(const std::filesystem::path& path) { return read_cemb(std::span(&path, 1)); }

EmbeddingMatrix read_cemb(std::span<const std::filesystem::path> paths) {
  if (paths.empty()) throw Error(ErrorCode::kInvalidArgument, "no embedding files given");
  std::optional<EmbeddingMatrix> out;
  std::string id;
  std::vector<float> row;
  for (const auto& path : paths) {
    CembReader reader(path);
    if (!out) {
      out.emplace(reader.dim());
    } else if (out->dim() != reader.dim()) {
      throw Error(ErrorCode::kDimMismatch, path.string() + " has dim " + std::to_string(reader.dim()) +
                                               ", previous shards have " + std::to_string(out->dim()));
    }
    out->reserve(out->rows() + reader.count());
    while (reader.next(id, row)) out->append(id, row);
  }
  return std::move(*out);
}

void write_cemb(const std::filesystem::path& path, const EmbeddingMatrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(kCembMagic, 4);
  binary::write_le<std::uint32_t>(out, kCembVersion);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  binary::write_le<std::uint64_t>(out, matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const auto& id = matrix.id(i);
    binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
    for (float x : matrix.row(i)) binary::write_f32(out, x);
  }
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace ragcap
