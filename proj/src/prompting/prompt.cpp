#include "ragcap/prompting/prompt.hpp"

#include "ragcap/core/error.hpp"

namespace ragcap {

namespace {

std::string_view separator_text(SegmentSeparator sep) { return sep == SegmentSeparator::kNewline ? "\n" : " "; }

std::string join_items(std::string_view lead, std::span<const std::string> items) {
  std::string out(lead);
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += trim(items[i]);
  }
  out += '.';
  return out;
}

}  // namespace

SegmentSeparator parse_segment_separator(std::string_view name) {
  if (name == "space") return SegmentSeparator::kSpace;
  if (name == "newline") return SegmentSeparator::kNewline;
  throw Error(ErrorCode::kInvalidArgument, "segment separator must be 'space' or 'newline', got '" +
                                               std::string(name) + "'");
}

std::string PromptString::reconstruct() const {
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!segments[i].present()) continue;
    if (!out.empty()) out += separator_text(separator);
    out += segment(i);
  }
  return out;
}

PromptString assemble_prompt(const PromptSpec& spec, SegmentSeparator sep) {
  if (spec.lang.display_name.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "language '" + spec.lang.code + "' has no display name");
  }
  std::array<std::string, 3> parts;
  if (!spec.captions.empty()) parts[0] = join_items(kCaptionsLead, spec.captions);
  if (!spec.concepts.empty()) parts[1] = join_items(kConceptsLead, spec.concepts);
  parts[2] = std::string(kTargetLead) + spec.lang.display_name + ":";

  PromptString prompt;
  prompt.separator = sep;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) {
      prompt.segments[i] = {prompt.text.size(), 0};
      continue;
    }
    if (!prompt.text.empty()) prompt.text += separator_text(sep);
    prompt.segments[i] = {prompt.text.size(), parts[i].size()};
    prompt.text += parts[i];
  }
  return prompt;
}

PromptString assemble_prompt(const AugmentationBundle& bundle, const LanguageCode& lang, SegmentSeparator sep) {
  PromptSpec spec;
  spec.lang = lang;
  spec.captions.reserve(bundle.captions.size());
  for (const auto& c : bundle.captions) spec.captions.push_back(c.text);
  spec.concepts.reserve(bundle.concepts.size());
  for (const auto& c : bundle.concepts) spec.concepts.push_back(c.token);
  return assemble_prompt(spec, sep);
}

std::vector<PromptString> assemble_batch(std::span<const AugmentationBundle> bundles, const LanguageCode& lang,
                                         SegmentSeparator sep) {
  std::vector<PromptString> out;
  out.reserve(bundles.size());
  for (const auto& bundle : bundles) out.push_back(assemble_prompt(bundle, lang, sep));
  return out;
}

}  // namespace ragcap
