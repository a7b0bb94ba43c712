#include "ragcap/pipeline/generator_client.hpp"

#include <atomic>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>

#include "ragcap/prompting/prompt.hpp"

namespace ragcap::pipeline {

GeneratorRequest GeneratorRequest::from(const RunConfig& cfg, std::string image_ref, std::string prompt) {
  return GeneratorRequest{std::move(image_ref), std::move(prompt), cfg.beam_size, cfg.length_penalty, cfg.max_tokens};
}

nlohmann::json GeneratorRequest::to_json() const {
  return nlohmann::json{{"image_ref", image_ref},
                        {"prompt", prompt},
                        {"beam_size", beam_size},
                        {"length_penalty", length_penalty},
                        {"max_tokens", max_tokens}};
}

GeneratorRequest GeneratorRequest::from_json(const nlohmann::json& j) {
  GeneratorRequest r;
  try {
    j.at("image_ref").get_to(r.image_ref);
    j.at("prompt").get_to(r.prompt);
    j.at("beam_size").get_to(r.beam_size);
    j.at("length_penalty").get_to(r.length_penalty);
    j.at("max_tokens").get_to(r.max_tokens);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("malformed generator request: ") + e.what());
  }
  return r;
}

nlohmann::json GeneratorResponse::to_json() const {
  if (caption) return nlohmann::json{{"caption", *caption}};
  return nlohmann::json{{"error", error.value_or("unknown error")}};
}

GeneratorResponse GeneratorResponse::from_json(const nlohmann::json& j) {
  GeneratorResponse r;
  if (!j.is_object()) throw Error(ErrorCode::kMalformedResponse, "generator reply is not a JSON object");
  if (auto it = j.find("caption"); it != j.end() && it->is_string()) {
    r.caption = it->get<std::string>();
  } else if (auto err = j.find("error"); err != j.end() && err->is_string()) {
    r.error = err->get<std::string>();
  } else {
    throw Error(ErrorCode::kMalformedResponse, "generator reply has neither 'caption' nor 'error'");
  }
  return r;
}

HttpGenerator::HttpGenerator(const std::string& endpoint, int timeout_ms) : timeout_ms_(timeout_ms) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos || endpoint.substr(0, scheme) != "http") {
    throw Error(ErrorCode::kInvalidArgument, "endpoint must be an http:// URL, got '" + endpoint + "'");
  }
  const auto slash = endpoint.find('/', scheme + 3);
  base_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/caption" : endpoint.substr(slash);
}

GeneratorResponse HttpGenerator::call(const GeneratorRequest& request) {
  httplib::Client client(base_);
  const auto seconds = timeout_ms_ / 1000;
  const auto micros = (timeout_ms_ % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  auto res = client.Post(path_, request.to_json().dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kEndpointUnreachable, base_ + path_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    return GeneratorResponse{std::nullopt, "HTTP " + std::to_string(res->status)};
  }
  try {
    return GeneratorResponse::from_json(nlohmann::json::parse(res->body));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("unparsable generator reply: ") + e.what());
  }
}

SubprocessGenerator::SubprocessGenerator(const std::string& command) {
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    throw Error(ErrorCode::kEndpointUnreachable, std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw Error(ErrorCode::kEndpointUnreachable, std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  std::signal(SIGPIPE, SIG_IGN);
}

SubprocessGenerator::~SubprocessGenerator() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
  }
}

GeneratorResponse SubprocessGenerator::call(const GeneratorRequest& request) {
  std::lock_guard lock(mu_);
  const std::string line = request.to_json().dump() + "\n";
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kEndpointUnreachable, std::string("generator process: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  std::size_t newline;
  while ((newline = pending_.find('\n')) == std::string::npos) {
    char buf[4096];
    const ssize_t n = read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(ErrorCode::kEndpointUnreachable, "generator process closed its output");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
  const std::string reply = pending_.substr(0, newline);
  pending_.erase(0, newline + 1);
  try {
    return GeneratorResponse::from_json(nlohmann::json::parse(reply));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("unparsable generator reply: ") + e.what());
  }
}

nlohmann::json GenerationResult::to_json() const {
  nlohmann::json j{{"image_id", image_id}, {"caption", caption}};
  if (failed) {
    j["failed"] = true;
    j["error"] = error;
  }
  return j;
}

std::vector<GenerationResult> generate_all(std::span<const PromptRecord> prompts, GeneratorBackend& backend,
                                           const RunConfig& cfg, const GenerateOptions& options) {
  std::vector<GenerationResult> results(prompts.size());
  auto run_one = [&](std::size_t i) {
    const PromptRecord& p = prompts[i];
    GenerationResult& r = results[i];
    r.image_id = p.image_id;
    const GeneratorRequest request = GeneratorRequest::from(cfg, p.image_id, p.prompt);
    auto delay = std::chrono::milliseconds(options.backoff_ms);
    for (int attempt = 1; attempt <= options.attempts; ++attempt) {
      r.attempts = attempt;
      try {
        GeneratorResponse resp = backend.call(request);
        if (resp.caption) {
          r.caption = std::move(*resp.caption);
          r.failed = false;
          r.error.clear();
          r.error_code.reset();
          return;
        }
        r.error = *resp.error;
        r.error_code.reset();
      } catch (const Error& e) {
        r.error = e.what();
        r.error_code = e.code();
      }
      r.failed = true;
      if (attempt < options.attempts) {
        std::this_thread::sleep_for(delay);
        delay *= 2;
      }
    }
  };

  const int workers = std::max(1, std::min({options.concurrency, backend.max_concurrency(),
                                            static_cast<int>(std::max<std::size_t>(1, prompts.size()))}));
  if (workers == 1) {
    for (std::size_t i = 0; i < prompts.size(); ++i) run_one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < prompts.size(); i = next++) run_one(i);
      });
    }
  }
  return results;
}

std::string stub_caption(std::string_view prompt) {
  const auto cue = prompt.rfind(kTargetLead);
  const std::string_view head = prompt.substr(0, cue == std::string_view::npos ? prompt.size() : cue);
  auto last_item = [](std::string_view items) {
    const auto sep = items.rfind(", ");
    return sep == std::string_view::npos ? items : items.substr(sep + 2);
  };
  if (const auto at = head.rfind(kConceptsLead); at != std::string_view::npos) {
    std::string_view items = head.substr(at + kConceptsLead.size());
    while (!items.empty() && (items.back() == ' ' || items.back() == '\n')) items.remove_suffix(1);
    if (!items.empty() && items.back() == '.') items.remove_suffix(1);
    return std::string(last_item(items));
  }
  if (head.starts_with(kCaptionsLead)) {
    std::string_view items = head.substr(kCaptionsLead.size());
    const auto sep = items.find(", ");
    std::string first(items.substr(0, sep));
    first = trim(first);
    if (sep == std::string_view::npos && !first.empty() && first.back() == '.') first.pop_back();
    return first;
  }
  return "a photo";
}

}  // namespace ragcap::pipeline
