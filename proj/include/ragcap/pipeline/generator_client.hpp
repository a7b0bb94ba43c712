#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ragcap/core/error.hpp"
#include "ragcap/core/records.hpp"

namespace ragcap::pipeline {

struct GeneratorRequest {
  std::string image_ref;
  std::string prompt;
  int beam_size = 5;
  double length_penalty = 1.0;
  int max_tokens = 25;

  static GeneratorRequest from(const RunConfig& cfg, std::string image_ref, std::string prompt);
  nlohmann::json to_json() const;
  static GeneratorRequest from_json(const nlohmann::json& j);
};

// Exactly one of caption / error is set.
struct GeneratorResponse {
  std::optional<std::string> caption;
  std::optional<std::string> error;

  nlohmann::json to_json() const;
  // Throws MalformedResponse unless the object carries a string "caption"
  // or "error".
  static GeneratorResponse from_json(const nlohmann::json& j);
};

// The external caption model. call() throws EndpointUnreachable when the
// backend cannot be reached and MalformedResponse for unparsable replies;
// a reachable backend reporting failure returns a response with `error`.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual GeneratorResponse call(const GeneratorRequest& request) = 0;
  // Largest number of concurrent call()s the backend supports.
  virtual int max_concurrency() const { return 1; }
};

// POSTs the request JSON to <endpoint> (path defaults to /caption).
class HttpGenerator final : public GeneratorBackend {
 public:
  HttpGenerator(const std::string& endpoint, int timeout_ms);
  GeneratorResponse call(const GeneratorRequest& request) override;
  int max_concurrency() const override { return 64; }

 private:
  std::string base_;
  std::string path_;
  int timeout_ms_;
};

// Runs `command` through /bin/sh once and exchanges one JSON object per line
// over its stdin/stdout. Calls are serialized.
class SubprocessGenerator final : public GeneratorBackend {
 public:
  explicit SubprocessGenerator(const std::string& command);
  ~SubprocessGenerator() override;
  SubprocessGenerator(const SubprocessGenerator&) = delete;
  SubprocessGenerator& operator=(const SubprocessGenerator&) = delete;

  GeneratorResponse call(const GeneratorRequest& request) override;

 private:
  std::mutex mu_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;
};

struct PromptRecord {
  std::string image_id;
  std::string prompt;
  std::string lang;
};

struct GenerationResult {
  std::string image_id;
  std::string caption;
  bool failed = false;
  std::string error;
  std::optional<ErrorCode> error_code;  // set when the last attempt threw
  int attempts = 0;

  nlohmann::json to_json() const;
};

struct GenerateOptions {
  int concurrency = 4;
  int attempts = 3;
  int backoff_ms = 200;  // doubles after every failed attempt
};

// One result per prompt, in prompt order, regardless of concurrency.
std::vector<GenerationResult> generate_all(std::span<const PromptRecord> prompts, GeneratorBackend& backend,
                                           const RunConfig& cfg, const GenerateOptions& options);

// Deterministic stand-in for the caption model: the last concept in the
// prompt, else the first retrieved caption, else "a photo".
std::string stub_caption(std::string_view prompt);

}  // namespace ragcap::pipeline
