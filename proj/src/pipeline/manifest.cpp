#include "ragcap/pipeline/manifest.hpp"

#include <array>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "ragcap/core/error.hpp"
#include "ragcap/core/jsonl.hpp"

namespace ragcap::pipeline {

namespace {

struct DigestContext {
  DigestContext() : ctx(EVP_MD_CTX_new()) {
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::kInvalidArgument, "SHA-256 unavailable");
    }
  }
  ~DigestContext() { EVP_MD_CTX_free(ctx); }
  DigestContext(const DigestContext&) = delete;
  DigestContext& operator=(const DigestContext&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx, data, n); }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 0xF];
    }
    return out;
  }

  EVP_MD_CTX* ctx;
};

bool same_file(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::error_code ec;
  return std::filesystem::weakly_canonical(a, ec) == std::filesystem::weakly_canonical(b, ec);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  DigestContext ctx;
  ctx.update(bytes.data(), bytes.size());
  return ctx.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  DigestContext ctx;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) ctx.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return ctx.hex();
}

void RunManifest::add_input(const std::filesystem::path& path) { inputs[path.string()] = sha256_file(path); }
void RunManifest::add_output(const std::filesystem::path& path) { outputs[path.string()] = sha256_file(path); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& s : stages) timings.push_back({{"name", s.name}, {"wall_seconds", s.wall_seconds}});
  return nlohmann::json{{"command", command}, {"config", config},     {"inputs", inputs},
                        {"outputs", outputs}, {"tool_version", tool_version}, {"stages", std::move(timings)},
                        {"created_at", created_at}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    j.at("command").get_to(m.command);
    m.config = j.at("config");
    j.at("inputs").get_to(m.inputs);
    j.at("outputs").get_to(m.outputs);
    j.at("tool_version").get_to(m.tool_version);
    for (const auto& s : j.at("stages")) m.stages.push_back({s.at("name"), s.at("wall_seconds")});
    m.created_at = j.value("created_at", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_file(path, manifest.to_json().dump(2) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  try {
    return RunManifest::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptFile, path.string() + ": " + e.what());
  }
}

std::vector<std::string> verify_manifest(const RunManifest& manifest) {
  std::vector<std::string> problems;
  auto check = [&](const std::map<std::string, std::string>& files) {
    for (const auto& [path, expected] : files) {
      if (!std::filesystem::exists(path)) {
        problems.push_back(path + ": missing");
        continue;
      }
      const std::string found = sha256_file(path);
      if (found != expected) problems.push_back(path + ": expected " + expected + ", found " + found);
    }
  };
  check(manifest.inputs);
  check(manifest.outputs);
  return problems;
}

void verify_upstream(const std::filesystem::path& input) {
  const auto manifest_path = manifest_path_for(input);
  if (!std::filesystem::exists(manifest_path)) return;
  const RunManifest manifest = read_manifest(manifest_path);
  for (const auto& [path, expected] : manifest.outputs) {
    if (!same_file(path, input)) continue;
    const std::string found = sha256_file(input);
    if (found != expected) {
      throw Error(ErrorCode::kManifestMismatch, input.string() + " changed since '" + manifest.command +
                                                    "' wrote it (expected " + expected + ", found " + found + ")");
    }
  }
}

}  // namespace ragcap::pipeline
