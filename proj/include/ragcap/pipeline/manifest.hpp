#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace ragcap::pipeline {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct StageTiming {
  std::string name;
  double wall_seconds = 0.0;
};

// Provenance for one stage run, written next to its primary output as
// "<output>.manifest.json".
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> inputs;   // path -> sha256
  std::map<std::string, std::string> outputs;  // path -> sha256
  std::string tool_version;
  std::vector<StageTiming> stages;
  std::string created_at;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

std::filesystem::path manifest_path_for(const std::filesystem::path& output);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

// Files whose current digest differs from the one recorded (inputs and
// outputs), as "path: expected X, found Y" lines. Missing files are reported too.
std::vector<std::string> verify_manifest(const RunManifest& manifest);

// If `input` was produced by an earlier stage (a sibling manifest lists it
// as an output), checks that it has not changed since. Throws ManifestMismatch.
void verify_upstream(const std::filesystem::path& input);

}  // namespace ragcap::pipeline
