#include "ragcap/pipeline/config.hpp"

#include <charconv>
#include <fstream>

#include "ragcap/core/error.hpp"

namespace ragcap::pipeline {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kInvalidArgument, "setting '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::kInvalidArgument, "setting '" + key + "': expected a boolean, got '" + value + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  run.validate();
  if (max_per_image && *max_per_image < 1) throw Error(ErrorCode::kInvalidArgument, "max_per_image must be >= 1");
  if (concurrency < 1) throw Error(ErrorCode::kInvalidArgument, "concurrency must be >= 1");
  if (attempts < 1) throw Error(ErrorCode::kInvalidArgument, "attempts must be >= 1");
  if (backoff_ms < 0) throw Error(ErrorCode::kInvalidArgument, "backoff_ms must be >= 0");
  if (timeout_ms < 1) throw Error(ErrorCode::kInvalidArgument, "timeout_ms must be >= 1");
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j = run;
  j["exclude_image_id"] = exclude_image_id;
  j["max_per_image"] = max_per_image ? nlohmann::json(*max_per_image) : nlohmann::json(nullptr);
  j["dedup_texts"] = dedup_texts;
  j["segment_sep"] = segment_sep == SegmentSeparator::kSpace ? "space" : "newline";
  j["concurrency"] = concurrency;
  j["attempts"] = attempts;
  j["backoff_ms"] = backoff_ms;
  j["timeout_ms"] = timeout_ms;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  return j;
}

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n_captions") {
    cfg.run.n_captions = parse_number<int>(key, value);
  } else if (key == "m_concepts") {
    cfg.run.m_concepts = parse_number<int>(key, value);
  } else if (key == "beam_size") {
    cfg.run.beam_size = parse_number<int>(key, value);
  } else if (key == "length_penalty") {
    cfg.run.length_penalty = parse_number<double>(key, value);
  } else if (key == "max_tokens") {
    cfg.run.max_tokens = parse_number<int>(key, value);
  } else if (key == "retrieval_mode") {
    cfg.run.retrieval_mode = parse_retrieval_mode(value);
  } else if (key == "exclude_image_id") {
    cfg.exclude_image_id = parse_bool(key, value);
  } else if (key == "max_per_image") {
    if (value == "unlimited" || value.empty()) {
      cfg.max_per_image.reset();
    } else {
      cfg.max_per_image = parse_number<int>(key, value);
    }
  } else if (key == "dedup_texts") {
    cfg.dedup_texts = parse_bool(key, value);
  } else if (key == "segment_sep") {
    cfg.segment_sep = parse_segment_separator(value);
  } else if (key == "concurrency") {
    cfg.concurrency = parse_number<int>(key, value);
  } else if (key == "attempts") {
    cfg.attempts = parse_number<int>(key, value);
  } else if (key == "backoff_ms") {
    cfg.backoff_ms = parse_number<int>(key, value);
  } else if (key == "timeout_ms") {
    cfg.timeout_ms = parse_number<int>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown setting '" + key + "'");
  }
}

void load_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    try {
      apply_setting(cfg, key, value);
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.detail());
    }
  }
}

}  // namespace ragcap::pipeline
