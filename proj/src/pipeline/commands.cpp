#include "ragcap/pipeline/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>

#include "ragcap/concepts/wordlist.hpp"
#include "ragcap/core/error.hpp"
#include "ragcap/core/jsonl.hpp"
#include "ragcap/index/dense_index.hpp"
#include "ragcap/metrics/evaluate.hpp"
#include "ragcap/pipeline/generator_client.hpp"
#include "ragcap/pipeline/manifest.hpp"
#include "ragcap/prompting/prompt.hpp"
#include "ragcap/retrieval/retriever.hpp"

#ifndef RAGCAP_VERSION
#define RAGCAP_VERSION "dev"
#endif

namespace ragcap::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

std::ostream& info(CommandContext& ctx) {
  static std::ostringstream sink;
  if (ctx.quiet || ctx.out == nullptr) {
    sink.str({});
    return sink;
  }
  return *ctx.out;
}

std::ostream& diag(CommandContext& ctx) { return ctx.err != nullptr ? *ctx.err : std::cerr; }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownLanguage:
      return kExitUsage;
    case ErrorCode::kEndpointUnreachable:
      return kExitEndpoint;
    default:
      return kExitData;
  }
}

template <typename Fn>
int guarded(CommandContext& ctx, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    diag(ctx) << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    diag(ctx) << "error: " << e.what() << "\n";
    return kExitData;
  }
}

LanguageCode require_lang(const CommandContext& ctx) {
  if (!ctx.lang) throw Error(ErrorCode::kInvalidArgument, "--lang is required for this command");
  return ctx.languages.validate(*ctx.lang);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_inputs(std::span<const Path> inputs) {
  for (const auto& p : inputs) verify_upstream(p);
}

void emit_manifest(const CommandContext& ctx, const std::string& command, std::span<const Path> inputs,
                   std::span<const Path> outputs, Clock::time_point start) {
  RunManifest m;
  m.command = command;
  m.config = ctx.config.to_json();
  if (ctx.lang) m.config["lang"] = *ctx.lang;
  for (const auto& p : inputs) m.add_input(p);
  for (const auto& p : outputs) m.add_output(p);
  m.tool_version = RAGCAP_VERSION;
  m.stages.push_back({command, seconds_since(start)});
  m.created_at = utc_timestamp();
  write_manifest(m, manifest_path_for(outputs.front()));
}

std::vector<CaptionRecord> read_caption_records(const Path& path, const LanguageTable& languages,
                                                const std::optional<LanguageCode>& default_lang) {
  std::vector<CaptionRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  for_each_jsonl(path, [&](const nlohmann::json& obj, std::size_t line) {
    const std::string where = path.string() + ":" + std::to_string(line);
    CaptionRecord r;
    r.caption_id = require_string(obj, "caption_id", where);
    r.image_id = obj.contains("image_id") ? require_string(obj, "image_id", where) : std::string();
    if (obj.contains("lang")) {
      r.lang = languages.validate(require_string(obj, "lang", where));
    } else if (default_lang) {
      r.lang = *default_lang;
    } else {
      throw Error(ErrorCode::kCorruptFile, where + ": record has no 'lang' and no --lang was given");
    }
    r.text = require_string(obj, "text", where);
    if (trim(r.text).empty()) throw Error(ErrorCode::kCorruptFile, where + ": empty caption text");
    if (!seen.emplace(r.caption_id, r.lang.code).second) {
      throw Error(ErrorCode::kKeyCollision, where + ": duplicate caption_id '" + r.caption_id + "' for '" +
                                                r.lang.code + "'");
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::unordered_set<std::string> read_id_lines(const Path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::unordered_set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty() && line.front() != '#') ids.insert(line);
  }
  return ids;
}

}  // namespace

int cmd_build_index(CommandContext& ctx, const BuildIndexArgs& args) {
  return guarded(ctx, [&] {
    const auto start = Clock::now();
    const LanguageCode lang = require_lang(ctx);
    if (args.embeddings.empty()) throw Error(ErrorCode::kInvalidArgument, "no embedding files given");
    check_inputs(args.embeddings);
    IndexMeta meta;
    meta.corpus = args.corpus.empty() ? args.embeddings.front().stem().string() : args.corpus;
    meta.lang = lang.code;
    meta.kind = parse_index_kind(args.kind);
    meta.built_at = utc_timestamp();

    std::optional<IndexWriter> writer;
    std::uint32_t dim = 0;
    std::string id;
    std::vector<float> row;
    for (const auto& path : args.embeddings) {
      CembReader reader(path);
      if (!writer) {
        dim = reader.dim();
        writer.emplace(args.out, dim, meta);
      } else if (reader.dim() != dim) {
        throw Error(ErrorCode::kDimMismatch, path.string() + " has dim " + std::to_string(reader.dim()) +
                                                 ", expected " + std::to_string(dim));
      }
      while (reader.next(id, row)) writer->add(id, row);
    }
    const auto rows = writer->finish();
    info(ctx) << "indexed " << rows << " rows, dim=" << dim << "\n";
    emit_manifest(ctx, "build-index", args.embeddings, std::span(&args.out, 1), start);
    return kExitOk;
  });
}

int cmd_extract_concepts(CommandContext& ctx, const ExtractConceptsArgs& args) {
  return guarded(ctx, [&] {
    const auto start = Clock::now();
    const LanguageCode lang = require_lang(ctx);
    check_inputs(std::span(&args.captions, 1));
    const auto records = read_caption_records(args.captions, ctx.languages, lang);
    Tokenizer tokenizer;
    tokenizer.set_min_token_length(args.min_length);
    Wordlist wordlist = extract_concepts(records, lang, tokenizer, parse_concept_source(args.source));
    wordlist.provenance = {args.captions.filename().string()};
    save_wordlist(args.out, wordlist);
    std::vector<Path> outputs{args.out};

    if (args.wrapped_out) {
      const TemplateTable table = args.templates ? TemplateTable::load(*args.templates) : TemplateTable::defaults();
      wordlist.apply_templates(table);
      JsonlWriter writer(*args.wrapped_out);
      for (const auto& e : wordlist.entries()) writer.write({{"token", e.token}, {"wrapped", e.wrapped}});
      writer.close();
      outputs.push_back(*args.wrapped_out);
    }
    info(ctx) << "extracted " << wordlist.size() << " unique tokens from " << records.size() << " captions ("
              << lang.code << ", tokenizer=" << tokenizer.adapter_name(lang.code) << ")\n";
    std::vector<Path> inputs{args.captions};
    if (args.templates) inputs.push_back(*args.templates);
    emit_manifest(ctx, "extract-concepts", inputs, outputs, start);
    return kExitOk;
  });
}

int cmd_enrich(CommandContext& ctx, const EnrichArgs& args) {
  return guarded(ctx, [&] {
    const auto start = Clock::now();
    const LanguageCode lang = require_lang(ctx);
    std::vector<Path> inputs{args.base};
    inputs.insert(inputs.end(), args.additions.begin(), args.additions.end());
    if (args.filter) inputs.push_back(*args.filter);
    if (args.filter_corpus) inputs.push_back(*args.filter_corpus);
    if (args.exclude_images) inputs.push_back(*args.exclude_images);
    check_inputs(inputs);

    std::optional<ContaminationFilter> filter;
    if (args.filter) {
      std::unordered_set<std::string> blocked;
      for (auto& token : load_wordlist(*args.filter, lang).tokens()) blocked.insert(std::move(token));
      filter.emplace(std::move(blocked));
    } else if (args.filter_corpus || args.exclude_images) {
      if (!args.filter_corpus || !args.exclude_images) {
        throw Error(ErrorCode::kInvalidArgument, "--filter-corpus and --exclude-images go together");
      }
      const auto records = read_caption_records(*args.filter_corpus, ctx.languages, lang);
      filter = ContaminationFilter::from_corpus(records, read_id_lines(*args.exclude_images));
    }

    Wordlist merged = load_wordlist(args.base, lang);
    std::string header = "lang\t" + args.base.stem().string();
    std::string sizes = lang.code + "\t" + std::to_string(merged.size());
    for (const auto& path : args.additions) {
      Wordlist addition = load_wordlist(path, lang);
      merged = merge_wordlists(merged, std::span(&addition, 1), filter ? &*filter : nullptr);
      header += "\t+" + path.stem().string();
      sizes += "\t" + std::to_string(merged.size());
    }
    save_wordlist(args.out, merged);
    info(ctx) << header << "\n" << sizes << "\n";
    if (filter) info(ctx) << "contamination filter: " << filter->size() << " tokens blocked\n";
    emit_manifest(ctx, "enrich", inputs, std::span(&args.out, 1), start);
    return kExitOk;
  });
}

int cmd_retrieve(CommandContext& ctx, const RetrieveArgs& args) {
  return guarded(ctx, [&] {
    const auto start = Clock::now();
    const LanguageCode lang = require_lang(ctx);
    const PipelineConfig& cfg = ctx.config;
    cfg.validate();
    std::vector<Path> inputs = args.queries;
    for (const auto* p : {&args.caption_index, &args.concept_index, &args.texts, &args.oracle, &args.caption_records}) {
      if (*p) inputs.push_back(**p);
    }
    check_inputs(inputs);

    const EmbeddingMatrix queries = read_cemb(args.queries);
    std::optional<DenseIndex> caption_index;
    std::optional<DenseIndex> concept_index;
    std::optional<PivotMap> texts;
    std::optional<OracleMap> oracle;
    if (cfg.run.n_captions > 0) {
      if (!args.caption_index || !args.texts) {
        throw Error(ErrorCode::kInvalidArgument, "n_captions > 0 needs --caption-index and --texts");
      }
      caption_index = load_index(*args.caption_index);
      texts = PivotMap::load(*args.texts);
    }
    if (cfg.run.m_concepts > 0) {
      if (!args.concept_index) throw Error(ErrorCode::kInvalidArgument, "m_concepts > 0 needs --concept-index");
      concept_index = load_index(*args.concept_index);
    }
    if (args.oracle) oracle = load_oracle_map(*args.oracle);

    std::unordered_map<std::string, std::string> caption_images;
    RetrievalOptions options;
    options.exclude_image_id = cfg.exclude_image_id;
    options.max_per_image = cfg.max_per_image;
    options.dedup_texts = cfg.dedup_texts;
    options.threads = args.threads;
    if (args.caption_records) {
      for_each_jsonl(*args.caption_records, [&](const nlohmann::json& obj, std::size_t line) {
        const std::string where = args.caption_records->string() + ":" + std::to_string(line);
        caption_images.insert_or_assign(require_string(obj, "caption_id", where), require_string(obj, "image_id", where));
      });
      options.caption_images = &caption_images;
    }

    const BatchOutcome outcome =
        retrieve_batch(queries, caption_index ? &*caption_index : nullptr, concept_index ? &*concept_index : nullptr,
                       cfg.run, texts ? &*texts : nullptr, lang, oracle ? &*oracle : nullptr, options);
    JsonlWriter writer(args.out);
    for (const auto& bundle : outcome.bundles) writer.write(bundle_to_json(bundle));
    writer.close();
    emit_manifest(ctx, "retrieve", inputs, std::span(&args.out, 1), start);

    info(ctx) << "retrieved " << outcome.bundles.size() << " bundles (n=" << cfg.run.n_captions
              << ", m=" << cfg.run.m_concepts << ", mode=" << to_string(cfg.run.retrieval_mode) << ")\n";
    if (!outcome.failures.empty()) {
      std::string ids;
      for (const auto& f : outcome.failures) {
        diag(ctx) << "error: " << f.image_id << ": " << f.message << "\n";
        ids += (ids.empty() ? "" : ",") + f.image_id;
      }
      diag(ctx) << "failed queries (" << outcome.failures.size() << "): " << ids << "\n";
      return kExitPartial;
    }
    return kExitOk;
  });
}

int cmd_prompt(CommandContext& ctx, const PromptArgs& args) {
  return guarded(ctx, [&] {
    const auto start = Clock::now();
    const LanguageCode lang = require_lang(ctx);
    check_inputs(std::span(&args.bundles, 1));
    std::vector<AugmentationBundle> bundles;
    for_each_jsonl(args.bundles, [&](const nlohmann::json& obj, std::size_t) { bundles.push_back(bundle_from_json(obj)); });
    const auto prompts = assemble_batch(bundles, lang, ctx.config.segment_sep);
    JsonlWriter writer(args.out);
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      writer.write({{"image_id", bundles[i].image_id}, {"prompt", prompts[i].text}, {"lang", lang.code}});
    }
    writer.close();
    info(ctx) << "assembled " << prompts.size() << " prompts (" << lang.display_name << ")\n";
    emit_manifest(ctx, "prompt", std::span(&args.bundles, 1), std::span(&args.out, 1), start);
    return kExitOk;
  });
}

int cmd_generate(CommandContext& ctx, const GenerateArgs& args) {
  return guarded(ctx, [&] {
    const auto start = Clock::now();
    const PipelineConfig& cfg = ctx.config;
    cfg.validate();
    check_inputs(std::span(&args.prompts, 1));
    if (args.endpoint.has_value() == args.command.has_value()) {
      throw Error(ErrorCode::kInvalidArgument, "give exactly one of --endpoint or --command");
    }
    std::vector<PromptRecord> prompts;
    for_each_jsonl(args.prompts, [&](const nlohmann::json& obj, std::size_t line) {
      const std::string where = args.prompts.string() + ":" + std::to_string(line);
      prompts.push_back({require_string(obj, "image_id", where), require_string(obj, "prompt", where),
                         obj.value("lang", std::string())});
    });

    std::unique_ptr<GeneratorBackend> backend;
    if (args.endpoint) {
      backend = std::make_unique<HttpGenerator>(*args.endpoint, cfg.timeout_ms);
    } else {
      backend = std::make_unique<SubprocessGenerator>(*args.command);
    }
    const GenerateOptions options{cfg.concurrency, cfg.attempts, cfg.backoff_ms};
    const auto results = generate_all(prompts, *backend, cfg.run, options);
    backend.reset();

    JsonlWriter writer(args.out);
    std::size_t failed = 0;
    bool unreachable = false;
    for (const auto& r : results) {
      writer.write(r.to_json());
      if (r.failed) {
        ++failed;
        unreachable = unreachable || r.error_code == ErrorCode::kEndpointUnreachable;
        diag(ctx) << "error: " << r.image_id << ": " << r.error << " (after " << r.attempts << " attempts)\n";
      }
    }
    writer.close();
    emit_manifest(ctx, "generate", std::span(&args.prompts, 1), std::span(&args.out, 1), start);
    info(ctx) << "generated " << results.size() - failed << "/" << results.size() << " captions\n";
    if (unreachable) return kExitEndpoint;
    return failed > 0 ? kExitPartial : kExitOk;
  });
}

int cmd_evaluate(CommandContext& ctx, const EvaluateArgs& args) {
  return guarded(ctx, [&] {
    const auto start = Clock::now();
    const LanguageCode lang = require_lang(ctx);
    std::vector<Path> inputs{args.predictions, args.references};
    check_inputs(inputs);
    metrics::EvalOptions options;
    options.metrics.clear();
    for (const auto& name : args.metrics) options.metrics.push_back(metrics::parse_metric(name));
    if (options.metrics.empty()) throw Error(ErrorCode::kInvalidArgument, "no metrics requested");
    options.smoothing = args.bleu_add_one ? metrics::BleuSmoothing::kAddOne : metrics::BleuSmoothing::kNone;
    const auto report = metrics::evaluate_run(args.predictions, args.references, lang, options);
    write_file(args.out, report.to_json().dump(2) + "\n");
    for (const auto& s : report.scores) {
      info(ctx) << metrics::to_string(s.metric) << " " << s.value << " (" << report.n_images << " images, "
                << lang.code << ")\n";
    }
    emit_manifest(ctx, "evaluate", inputs, std::span(&args.out, 1), start);
    return kExitOk;
  });
}

FootprintReport measure_footprint(const Path& caption_index, const Path& concept_index) {
  FootprintReport r;
  for (const auto* p : {&caption_index, &concept_index}) {
    if (!std::filesystem::exists(*p)) throw Error(ErrorCode::kIoError, p->string() + " does not exist");
  }
  r.caption_bytes = std::filesystem::file_size(caption_index);
  r.concept_bytes = std::filesystem::file_size(concept_index);
  r.caption_rows = read_index_header(caption_index).count;
  r.concept_rows = read_index_header(concept_index).count;
  if (r.caption_bytes == 0) throw Error(ErrorCode::kCorruptFile, caption_index.string() + " is empty");
  r.ratio = static_cast<double>(r.concept_bytes) / static_cast<double>(r.caption_bytes);
  return r;
}

int cmd_footprint(CommandContext& ctx, const FootprintArgs& args) {
  return guarded(ctx, [&] {
    const FootprintReport r = measure_footprint(args.caption_index, args.concept_index);
    std::ostream& out = ctx.out != nullptr ? *ctx.out : std::cout;
    out << "caption_datastore\t" << args.caption_index.string() << "\trows=" << r.caption_rows
        << "\tbytes=" << r.caption_bytes << "\n";
    out << "concept_datastore\t" << args.concept_index.string() << "\trows=" << r.concept_rows
        << "\tbytes=" << r.concept_bytes << "\n";
    out << "ratio\t" << r.ratio << "\n";
    return kExitOk;
  });
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Retrieval-augmented multilingual captioning pipeline", "ragcap"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", RAGCAP_VERSION);

  std::optional<std::string> config_path;
  std::optional<std::string> lang;
  std::optional<std::string> languages_path;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--lang", lang, "target language code");
  app.add_option("--languages", languages_path, "extra language table (JSON {code: name})");
  app.add_option("--seed", seed, "reserved");
  app.add_flag("--quiet", quiet, "suppress progress output");

  // Setting overrides, applied after the config file.
  std::vector<std::pair<std::string, std::optional<std::string>>> overrides = {
      {"n_captions", {}},  {"m_concepts", {}}, {"retrieval_mode", {}}, {"beam_size", {}},   {"length_penalty", {}},
      {"max_tokens", {}},  {"concurrency", {}}, {"attempts", {}},      {"backoff_ms", {}},  {"timeout_ms", {}},
      {"segment_sep", {}}, {"max_per_image", {}}};
  auto override_option = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    for (auto& [k, v] : overrides) {
      if (k == key) sub->add_option(flag, v, help);
    }
  };
  bool exclude_image_id = false;
  bool dedup_texts = false;

  BuildIndexArgs build;
  auto* build_cmd = app.add_subcommand("build-index", "index a .cemb embedding file (or shards)");
  build_cmd->add_option("--embeddings,-i", build.embeddings, ".cemb input(s)")->required();
  build_cmd->add_option("--kind", build.kind, "caption | concept")->check(CLI::IsMember({"caption", "concept"}));
  build_cmd->add_option("--corpus", build.corpus, "corpus name recorded in the index");
  build_cmd->add_option("--out,-o", build.out, "index file")->required();

  ExtractConceptsArgs extract;
  std::optional<std::string> templates;
  std::optional<std::string> wrapped_out;
  auto* extract_cmd = app.add_subcommand("extract-concepts", "build a wordlist of unique caption tokens");
  extract_cmd->add_option("--captions,-i", extract.captions, "captions JSON-lines")->required();
  extract_cmd->add_option("--out,-o", extract.out, "wordlist file")->required();
  extract_cmd->add_option("--source", extract.source, "source tag");
  extract_cmd->add_option("--min-length", extract.min_length, "drop tokens shorter than this (code points)");
  extract_cmd->add_option("--templates", templates, "template table JSON");
  extract_cmd->add_option("--wrapped-out", wrapped_out, "JSON-lines of template-wrapped forms for embedding");

  EnrichArgs enrich;
  std::optional<std::string> filter;
  std::optional<std::string> filter_corpus;
  std::optional<std::string> exclude_images;
  auto* enrich_cmd = app.add_subcommand("enrich", "merge additional lexicons into a base wordlist");
  enrich_cmd->add_option("--base", enrich.base, "base wordlist")->required();
  enrich_cmd->add_option("--add", enrich.additions, "addition wordlist(s), merged in order");
  enrich_cmd->add_option("--filter", filter, "wordlist of tokens to block");
  enrich_cmd->add_option("--filter-corpus", filter_corpus, "captions JSON-lines used to derive the filter");
  enrich_cmd->add_option("--exclude-images", exclude_images, "held-out image ids, one per line");
  enrich_cmd->add_option("--out,-o", enrich.out, "merged wordlist")->required();

  RetrieveArgs retrieve;
  std::optional<std::string> caption_index;
  std::optional<std::string> concept_index;
  std::optional<std::string> texts;
  std::optional<std::string> oracle;
  std::optional<std::string> caption_records;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "retrieve captions and concepts per query image");
  retrieve_cmd->add_option("--queries,-q", retrieve.queries, "image embeddings (.cemb)")->required();
  retrieve_cmd->add_option("--caption-index", caption_index, "caption index");
  retrieve_cmd->add_option("--concept-index", concept_index, "concept index");
  retrieve_cmd->add_option("--texts,--pivot", texts, "caption texts JSON-lines {caption_id, lang, text}");
  retrieve_cmd->add_option("--oracle", oracle, "oracle concepts JSON-lines {image_id, concepts}");
  retrieve_cmd->add_option("--caption-records", caption_records, "captions JSON-lines with image ids");
  retrieve_cmd->add_option("--threads", retrieve.threads, "worker threads (0 = all cores)");
  retrieve_cmd->add_flag("--exclude-image-id", exclude_image_id, "skip captions of the query image");
  retrieve_cmd->add_flag("--dedup-texts", dedup_texts, "skip repeated caption texts");
  retrieve_cmd->add_option("--out,-o", retrieve.out, "bundles JSON-lines")->required();
  override_option(retrieve_cmd, "--n", "n_captions", "captions per image");
  override_option(retrieve_cmd, "--m", "m_concepts", "concepts per image");
  override_option(retrieve_cmd, "--mode", "retrieval_mode", "pivot_en | direct");
  override_option(retrieve_cmd, "--max-per-image", "max_per_image", "caption cap per source image");

  PromptArgs prompt;
  auto* prompt_cmd = app.add_subcommand("prompt", "assemble generator prompts from bundles");
  prompt_cmd->add_option("--bundles,-i", prompt.bundles, "bundles JSON-lines")->required();
  prompt_cmd->add_option("--out,-o", prompt.out, "prompts JSON-lines")->required();
  override_option(prompt_cmd, "--segment-sep", "segment_sep", "space | newline");

  GenerateArgs generate;
  std::optional<std::string> endpoint;
  std::optional<std::string> command;
  auto* generate_cmd = app.add_subcommand("generate", "call the caption generator for every prompt");
  generate_cmd->add_option("--prompts,-i", generate.prompts, "prompts JSON-lines")->required();
  generate_cmd->add_option("--endpoint", endpoint, "HTTP endpoint, e.g. http://127.0.0.1:8080/caption");
  generate_cmd->add_option("--command", command, "subprocess speaking JSON-lines on stdin/stdout");
  generate_cmd->add_option("--out,-o", generate.out, "predictions JSON-lines")->required();
  override_option(generate_cmd, "--beam-size", "beam_size", "beam size");
  override_option(generate_cmd, "--length-penalty", "length_penalty", "length penalty");
  override_option(generate_cmd, "--max-tokens", "max_tokens", "maximum output tokens");
  override_option(generate_cmd, "--concurrency", "concurrency", "parallel requests");
  override_option(generate_cmd, "--attempts", "attempts", "attempts per prompt");
  override_option(generate_cmd, "--backoff-ms", "backoff_ms", "initial retry delay");
  override_option(generate_cmd, "--timeout-ms", "timeout_ms", "per-request timeout");

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against references");
  evaluate_cmd->add_option("--predictions,-p", evaluate.predictions, "predictions JSON-lines")->required();
  evaluate_cmd->add_option("--references,-r", evaluate.references, "references JSON-lines")->required();
  evaluate_cmd->add_option("--metric", evaluate.metrics, "cider_d | bleu4 (repeatable)");
  evaluate_cmd->add_flag("--bleu-add-one", evaluate.bleu_add_one, "add-one smoothing for BLEU orders 2-4");
  evaluate_cmd->add_option("--out,-o", evaluate.out, "report JSON")->required();

  FootprintArgs footprint;
  auto* footprint_cmd = app.add_subcommand("footprint", "compare caption and concept datastore sizes");
  footprint_cmd->add_option("--caption-index", footprint.caption_index, "caption index")->required();
  footprint_cmd->add_option("--concept-index", footprint.concept_index, "concept index")->required();

  try {
    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CommandContext ctx;
  ctx.out = &out;
  ctx.err = &err;
  ctx.quiet = quiet;
  ctx.lang = lang;
  try {
    if (languages_path) ctx.languages.extend_from_json(*languages_path);
    if (config_path) load_config_file(ctx.config, *config_path);
    for (const auto& [key, value] : overrides) {
      if (value) apply_setting(ctx.config, key, *value);
    }
    if (exclude_image_id) ctx.config.exclude_image_id = true;
    if (dedup_texts) ctx.config.dedup_texts = true;
    if (seed) ctx.config.seed = seed;
    ctx.config.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }

  if (*build_cmd) return cmd_build_index(ctx, build);
  if (*extract_cmd) {
    if (templates) extract.templates = *templates;
    if (wrapped_out) extract.wrapped_out = *wrapped_out;
    return cmd_extract_concepts(ctx, extract);
  }
  if (*enrich_cmd) {
    if (filter) enrich.filter = *filter;
    if (filter_corpus) enrich.filter_corpus = *filter_corpus;
    if (exclude_images) enrich.exclude_images = *exclude_images;
    return cmd_enrich(ctx, enrich);
  }
  if (*retrieve_cmd) {
    if (caption_index) retrieve.caption_index = *caption_index;
    if (concept_index) retrieve.concept_index = *concept_index;
    if (texts) retrieve.texts = *texts;
    if (oracle) retrieve.oracle = *oracle;
    if (caption_records) retrieve.caption_records = *caption_records;
    return cmd_retrieve(ctx, retrieve);
  }
  if (*prompt_cmd) return cmd_prompt(ctx, prompt);
  if (*generate_cmd) {
    generate.endpoint = endpoint;
    generate.command = command;
    return cmd_generate(ctx, generate);
  }
  if (*evaluate_cmd) return cmd_evaluate(ctx, evaluate);
  if (*footprint_cmd) return cmd_footprint(ctx, footprint);
  return kExitUsage;
}

}  // namespace ragcap::pipeline
