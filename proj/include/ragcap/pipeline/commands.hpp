#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ragcap/core/language.hpp"
#include "ragcap/pipeline/config.hpp"

namespace ragcap::pipeline {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitPartial = 3,
  kExitEndpoint = 4,
};

using Path = std::filesystem::path;

// Shared by every command.
struct CommandContext {
  PipelineConfig config;
  LanguageTable languages;
  std::optional<std::string> lang;
  bool quiet = false;
  std::ostream* out = nullptr;  // informational output
  std::ostream* err = nullptr;  // diagnostics
};

struct BuildIndexArgs {
  std::vector<Path> embeddings;
  std::string kind = "caption";
  std::string corpus;  // defaults to the first input's stem
  Path out;
};

struct ExtractConceptsArgs {
  Path captions;  // JSON-lines {"caption_id", "image_id", "lang"?, "text"}
  Path out;
  std::string source = "coco";
  std::size_t min_length = 0;
  std::optional<Path> templates;
  std::optional<Path> wrapped_out;  // JSON-lines {"token", "wrapped"}
};

struct EnrichArgs {
  Path base;
  std::vector<Path> additions;
  std::optional<Path> filter;          // wordlist of tokens to block
  std::optional<Path> filter_corpus;   // captions JSON-lines
  std::optional<Path> exclude_images;  // one image id per line
  Path out;
};

struct RetrieveArgs {
  std::vector<Path> queries;
  std::optional<Path> caption_index;
  std::optional<Path> concept_index;
  std::optional<Path> texts;            // pivot map JSON-lines
  std::optional<Path> oracle;           // oracle map JSON-lines
  std::optional<Path> caption_records;  // caption -> image ids for image filters
  unsigned threads = 0;
  Path out;
};

struct PromptArgs {
  Path bundles;
  Path out;
};

struct GenerateArgs {
  Path prompts;
  std::optional<std::string> endpoint;
  std::optional<std::string> command;
  Path out;
};

struct EvaluateArgs {
  Path predictions;
  Path references;
  std::vector<std::string> metrics{"cider_d"};
  bool bleu_add_one = false;
  Path out;
};

struct FootprintArgs {
  Path caption_index;
  Path concept_index;
};

struct FootprintReport {
  std::uint64_t caption_bytes = 0;
  std::uint64_t concept_bytes = 0;
  std::uint64_t caption_rows = 0;
  std::uint64_t concept_rows = 0;
  double ratio = 0.0;  // concept / caption
};

FootprintReport measure_footprint(const Path& caption_index, const Path& concept_index);

// Each returns an ExitCode and reports failures on ctx.err.
int cmd_build_index(CommandContext& ctx, const BuildIndexArgs& args);
int cmd_extract_concepts(CommandContext& ctx, const ExtractConceptsArgs& args);
int cmd_enrich(CommandContext& ctx, const EnrichArgs& args);
int cmd_retrieve(CommandContext& ctx, const RetrieveArgs& args);
int cmd_prompt(CommandContext& ctx, const PromptArgs& args);
int cmd_generate(CommandContext& ctx, const GenerateArgs& args);
int cmd_evaluate(CommandContext& ctx, const EvaluateArgs& args);
int cmd_footprint(CommandContext& ctx, const FootprintArgs& args);

// Full command line (args[0] is the program name).
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ragcap::pipeline
