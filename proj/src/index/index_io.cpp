#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstring>
#include <ctime>

#include "ragcap/core/binary_io.hpp"
#include "ragcap/core/error.hpp"
#include "ragcap/index/dense_index.hpp"

namespace ragcap {

namespace {

constexpr std::uint32_t kMaxIdBytes = 1u << 20;
constexpr std::uint32_t kMaxMetaBytes = 1u << 24;
constexpr double kLoadUnitTolerance = 1e-5;

void write_header(std::ostream& out, std::uint32_t dim, std::uint64_t count, const IndexMeta& meta) {
  const std::string meta_json = meta_to_json(meta).dump();
  out.write(kIndexMagic, 4);
  binary::write_le<std::uint32_t>(out, kIndexVersion);
  binary::write_le<std::uint32_t>(out, dim);
  binary::write_le<std::uint64_t>(out, count);
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(meta_json.size()));
  out.write(meta_json.data(), static_cast<std::streamsize>(meta_json.size()));
}

void write_row(std::ostream& out, const std::string& id, std::span<const float> row) {
  binary::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
  out.write(id.data(), static_cast<std::streamsize>(id.size()));
  for (float x : row) binary::write_f32(out, x);
}

IndexHeader read_header(std::istream& in, const std::filesystem::path& path) {
  auto corrupt = [&](const std::string& what) { return Error(ErrorCode::kCorruptFile, path.string() + ": " + what); };
  char magic[4];
  if (!in.read(magic, 4)) throw corrupt("truncated header");
  if (std::memcmp(magic, kIndexMagic, 4) != 0) throw corrupt("bad magic");
  std::uint32_t version = 0;
  if (!binary::read_le(in, version)) throw corrupt("truncated header");
  if (version != kIndexVersion) throw corrupt("unsupported version " + std::to_string(version));
  IndexHeader header;
  std::uint32_t meta_len = 0;
  if (!binary::read_le(in, header.dim) || !binary::read_le(in, header.count) || !binary::read_le(in, meta_len)) {
    throw corrupt("truncated header");
  }
  if (header.dim == 0) throw corrupt("dim is zero");
  if (meta_len > kMaxMetaBytes) throw corrupt("implausible meta length");
  std::string meta_json;
  if (!binary::read_bytes(in, meta_json, meta_len)) throw corrupt("truncated meta block");
  try {
    header.meta = meta_from_json(nlohmann::json::parse(meta_json));
  } catch (const nlohmann::json::exception& e) {
    throw corrupt(std::string("bad meta block: ") + e.what());
  }
  return header;
}

}  // namespace

std::string_view to_string(IndexKind kind) noexcept { return kind == IndexKind::kCaption ? "caption" : "concept"; }

IndexKind parse_index_kind(std::string_view name) {
  if (name == "caption") return IndexKind::kCaption;
  if (name == "concept") return IndexKind::kConcept;
  throw Error(ErrorCode::kInvalidArgument, "unknown index kind '" + std::string(name) + "'");
}

nlohmann::json meta_to_json(const IndexMeta& meta) {
  return nlohmann::json{
      {"corpus", meta.corpus}, {"lang", meta.lang}, {"kind", to_string(meta.kind)}, {"built_at", meta.built_at}};
}

IndexMeta meta_from_json(const nlohmann::json& j) {
  IndexMeta meta;
  j.at("corpus").get_to(meta.corpus);
  j.at("lang").get_to(meta.lang);
  meta.kind = parse_index_kind(j.at("kind").get<std::string>());
  j.at("built_at").get_to(meta.built_at);
  return meta;
}

// Honors SOURCE_DATE_EPOCH for reproducible builds.
std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != nullptr && *end == '\0' && v >= 0) now = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void save_index(const DenseIndex& index, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  const auto& m = index.matrix();
  write_header(out, static_cast<std::uint32_t>(m.dim()), m.rows(), index.meta());
  for (std::size_t i = 0; i < m.rows(); ++i) write_row(out, m.id(i), m.row(i));
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

IndexHeader read_index_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_header(in, path);
}

DenseIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const IndexHeader header = read_header(in, path);
  auto corrupt = [&](const std::string& what) { return Error(ErrorCode::kCorruptFile, path.string() + ": " + what); };

  // Guard the reserve against a forged count: every row needs at least 4 + 1 + 4*dim bytes.
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  if (header.count > remaining / (5 + 4ull * header.dim)) throw corrupt("truncated: row count exceeds file size");

  EmbeddingMatrix matrix(header.dim);
  matrix.reserve(header.count);
  std::string id;
  std::vector<float> row(header.dim);
  for (std::uint64_t r = 0; r < header.count; ++r) {
    std::uint32_t id_len = 0;
    if (!binary::read_le(in, id_len)) throw corrupt("truncated at row " + std::to_string(r));
    if (id_len == 0 || id_len > kMaxIdBytes) throw corrupt("bad id length at row " + std::to_string(r));
    if (!binary::read_bytes(in, id, id_len)) throw corrupt("truncated at row " + std::to_string(r));
    for (auto& x : row) {
      if (!binary::read_f32(in, x)) throw corrupt("truncated at row " + std::to_string(r));
    }
    if (!(std::abs(l2_norm(row) - 1.0) <= kLoadUnitTolerance)) throw corrupt("row '" + id + "' is not unit-norm");
    matrix.append(id, row);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw corrupt("trailing bytes after last row");
  try {
    return DenseIndex::build(std::move(matrix), header.meta);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDuplicateId || e.code() == ErrorCode::kEmptyCorpus) throw corrupt(e.what());
    throw;
  }
}

IndexWriter::IndexWriter(const std::filesystem::path& path, std::uint32_t dim, IndexMeta meta)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), dim_(dim), scratch_(dim) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "index dim must be >= 1");
  out_.write(kIndexMagic, 4);
  binary::write_le<std::uint32_t>(out_, kIndexVersion);
  binary::write_le<std::uint32_t>(out_, dim);
  count_pos_ = out_.tellp();
  binary::write_le<std::uint64_t>(out_, 0);
  const std::string meta_json = meta_to_json(meta).dump();
  binary::write_le<std::uint32_t>(out_, static_cast<std::uint32_t>(meta_json.size()));
  out_.write(meta_json.data(), static_cast<std::streamsize>(meta_json.size()));
}

IndexWriter::~IndexWriter() {
  if (!finished_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
}

void IndexWriter::add(const std::string& id, std::span<const float> row) {
  if (row.size() != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                "row '" + id + "' has dim " + std::to_string(row.size()) + ", expected " + std::to_string(dim_));
  }
  if (!seen_.insert(id).second) throw Error(ErrorCode::kDuplicateId, "'" + id + "' appears more than once");
  std::copy(row.begin(), row.end(), scratch_.begin());
  if (!(std::abs(l2_norm(scratch_) - 1.0) <= 1e-6)) normalize_row(scratch_, id);
  write_row(out_, id, scratch_);
  ++count_;
}

std::uint64_t IndexWriter::finish() {
  if (count_ == 0) throw Error(ErrorCode::kEmptyCorpus, "no rows written to " + path_.string());
  out_.seekp(count_pos_);
  binary::write_le<std::uint64_t>(out_, count_);
  out_.close();
  if (!out_) throw Error(ErrorCode::kIoError, "write failed for " + path_.string());
  finished_ = true;
  return count_;
}

}  // namespace ragcap
