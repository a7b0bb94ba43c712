#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "ragcap/core/records.hpp"
#include "ragcap/prompting/prompt.hpp"

namespace ragcap::pipeline {

// Everything a run can be configured with. Precedence: CLI flag > config
// file > these defaults.
struct PipelineConfig {
  RunConfig run;

  bool exclude_image_id = false;
  std::optional<int> max_per_image;
  bool dedup_texts = false;
  SegmentSeparator segment_sep = SegmentSeparator::kSpace;

  int concurrency = 4;
  int attempts = 3;
  int backoff_ms = 200;
  int timeout_ms = 30000;

  std::optional<std::uint64_t> seed;  // reserved

  void validate() const;
  nlohmann::json to_json() const;
};

// Applies one `key = value` setting. Throws InvalidArgument for unknown keys
// or unparsable values.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value);

// TOML-like file: `key = value` per line, '#' comments, optional double
// quotes around values, `[section]` headers ignored.
void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

}  // namespace ragcap::pipeline
